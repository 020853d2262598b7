#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "cdgraph/forward.hpp"
#include "cdgraph/graph.hpp"
#include "cdgraph/rng.hpp"
#include "cdgraph/schedule.hpp"

using namespace cdgraph;

namespace {

CondGraph fixture_graph() {
  CondGraph g(4);
  g.x1 = {1, 0, 1, 0};
  g.x2 = {1, 1, 0, 0};
  g.set_edge(0, 1, 1);
  g.set_edge(1, 2, 1);
  g.set_edge(2, 3, 1);
  return g;
}

// flatten every variable of a graph in the canonical draw order
std::vector<int> flatten_bits(const CondGraph& g) {
  std::vector<int> bits;
  for (int i = 0; i < g.n; ++i) bits.push_back(g.x1[i]);
  for (int i = 0; i < g.n; ++i) bits.push_back(g.x2[i]);
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j) bits.push_back(g.edge(i, j));
  return bits;
}

}  // namespace

TEST_CASE("corrupt leaves the graph unchanged at vanishing noise") {
  const CondGraph g = fixture_graph();
  const NoiseSchedule s = make_schedule({1e-12});
  const NoisyGraph noisy = corrupt(g, s, 1, 123);
  REQUIRE(noisy.graph == g);
  REQUIRE(noisy.t == 1);
}

TEST_CASE("corrupt is deterministic given the seed") {
  const CondGraph g = fixture_graph();
  const NoiseSchedule s = make_schedule(50, 0.02, 0.6, ScheduleShape::linear);
  REQUIRE(corrupt(g, s, 20, 7).graph == corrupt(g, s, 20, 7).graph);
}

TEST_CASE("corrupt preserves node count, symmetry and the empty diagonal") {
  const CondGraph g = fixture_graph();
  const NoiseSchedule s = make_schedule(50, 0.02, 0.6, ScheduleShape::linear);
  Rng seeds(99);
  for (int trial = 0; trial < 50; ++trial) {
    const NoisyGraph noisy = corrupt(g, s, 1 + trial % s.T, seeds.next_u64());
    REQUIRE(noisy.graph.n == g.n);
    REQUIRE_NOTHROW(validate(noisy.graph));
  }
}

TEST_CASE("near-uniform corruption flips half the bits on average") {
  // beta = 0.98 for 8 steps pushes the cumulative flip to 0.5 - 4e-15
  const CondGraph g = fixture_graph();
  const NoiseSchedule s = make_schedule(8, 0.98, 0.98, ScheduleShape::linear);
  REQUIRE(cumulative_kernel(s, 8).flip == Catch::Approx(0.5).margin(1e-12));
  Rng seeds(4242);
  const int trials = 100000 / 14;  // 14 variables per draw
  long flipped = 0, total = 0;
  const std::vector<int> base = flatten_bits(g);
  for (int k = 0; k < trials; ++k) {
    const std::vector<int> bits = flatten_bits(corrupt(g, s, 8, seeds.next_u64()).graph);
    for (std::size_t v = 0; v < bits.size(); ++v) {
      flipped += bits[v] != base[v];
      ++total;
    }
  }
  REQUIRE(static_cast<double>(flipped) / total == Catch::Approx(0.5).margin(0.01));
}

TEST_CASE("single-node graphs only change their condition bits") {
  CondGraph g(1);
  g.x1[0] = 1;
  const NoiseSchedule s = make_schedule(8, 0.98, 0.98, ScheduleShape::linear);
  Rng seeds(5);
  bool x1_changed = false, x2_changed = false;
  for (int k = 0; k < 200; ++k) {
    const NoisyGraph noisy = corrupt(g, s, 8, seeds.next_u64());
    REQUIRE(noisy.graph.n == 1);
    REQUIRE(noisy.graph.edge_count() == 0);
    x1_changed |= noisy.graph.x1[0] != g.x1[0];
    x2_changed |= noisy.graph.x2[0] != g.x2[0];
  }
  REQUIRE(x1_changed);
  REQUIRE(x2_changed);
}

TEST_CASE("one corruption step composes like the step kernel, in distribution") {
  // marginal frequency of each variable after corrupt(t) vs corrupt(t-1)
  // followed by a manual step-kernel flip
  const CondGraph g = fixture_graph();
  const NoiseSchedule s = make_schedule(10, 0.1, 0.5, ScheduleShape::linear);
  const int t = 6;
  const int trials = 100000;
  const std::size_t nvars = flatten_bits(g).size();
  std::vector<double> freq_direct(nvars, 0.0), freq_composed(nvars, 0.0);
  Rng seeds(31);
  for (int k = 0; k < trials; ++k) {
    const std::vector<int> direct = flatten_bits(corrupt(g, s, t, seeds.next_u64()).graph);
    std::vector<int> composed = flatten_bits(corrupt(g, s, t - 1, seeds.next_u64()).graph);
    Rng step_rng(seeds.next_u64());
    const double f = step_kernel(s, t).flip;
    for (std::size_t v = 0; v < nvars; ++v)
      if (step_rng.bernoulli(f)) composed[v] ^= 1;
    for (std::size_t v = 0; v < nvars; ++v) {
      freq_direct[v] += direct[v];
      freq_composed[v] += composed[v];
    }
  }
  for (std::size_t v = 0; v < nvars; ++v)
    REQUIRE(freq_direct[v] / trials == Catch::Approx(freq_composed[v] / trials).margin(0.01));
}

TEST_CASE("contagion conditional follows the equal/unequal branches") {
  const ContagionParam p(0.8);
  REQUIRE(contagion_conditional(p, 1, 1) == 0.8);
  REQUIRE(contagion_conditional(p, 0, 1) == Catch::Approx(0.2).epsilon(1e-15));
  REQUIRE(contagion_conditional(p, 0, 0) == 0.5);
  REQUIRE(contagion_conditional(p, 1, 0) == 0.5);
}

TEST_CASE("contagion conditional normalizes over the endpoint's bit") {
  const ContagionParam p(0.73);
  for (int nb = 0; nb <= 1; ++nb)
    for (int e = 0; e <= 1; ++e) {
      const double p1 = contagion_conditional(p, nb, e);
      // P(x_m = 0 | ...) is the complementary branch
      const double p0 = e == 0 ? 0.5 : (nb == 0 ? p.p : 1.0 - p.p);
      REQUIRE(p1 + p0 == Catch::Approx(1.0).margin(1e-15));
    }
}

TEST_CASE("contagion parameter range is enforced") {
  REQUIRE_THROWS_AS(ContagionParam(0.5), std::invalid_argument);
  REQUIRE_THROWS_AS(ContagionParam(1.0), std::invalid_argument);
  REQUIRE_NOTHROW(ContagionParam(0.51));
}

TEST_CASE("homophily edge probability selects the matching branch") {
  REQUIRE(homophily_edge_prob(1, 0.7) == 0.7);
  REQUIRE(homophily_edge_prob(0, 0.7) == Catch::Approx(0.3).epsilon(1e-15));
  REQUIRE(homophily_edge_prob(1, 1.0) == 1.0);
  REQUIRE_THROWS_AS(homophily_edge_prob(1, 1.5), std::invalid_argument);
}

TEST_CASE("neighbor conditional is estimated from adjacent pairs") {
  // one triangle with x1 = (1,1,0): ordered adjacent pairs
  // (0,1),(1,0): both 1; (0,2),(1,2): m=1,n=0; (2,0),(2,1): m=0,n=1
  CondGraph g(3);
  g.x1 = {1, 1, 0};
  g.set_edge(0, 1, 1);
  g.set_edge(1, 2, 1);
  g.set_edge(0, 2, 1);
  const NeighborConditional nc = estimate_neighbor_conditional({g}, 1);
  REQUIRE(nc.given1 == Catch::Approx(2.0 / 4.0).epsilon(1e-15));
  REQUIRE(nc.given0 == Catch::Approx(2.0 / 2.0).epsilon(1e-15));
  // no edges at all: both conditionals fall back to 1/2
  const NeighborConditional empty = estimate_neighbor_conditional({CondGraph(3)}, 1);
  REQUIRE(empty.given1 == 0.5);
  REQUIRE(empty.given0 == 0.5);
}
