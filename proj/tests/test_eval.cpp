#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "cdgraph/eval.hpp"
#include "cdgraph/graph.hpp"
#include "cdgraph/rng.hpp"

using namespace cdgraph;

namespace {

CondGraph all_dual(CondGraph g) {
  std::fill(g.x1.begin(), g.x1.end(), 1);
  std::fill(g.x2.begin(), g.x2.end(), 1);
  return g;
}

CondGraph triangle() {
  CondGraph g(3);
  g.set_edge(0, 1, 1);
  g.set_edge(1, 2, 1);
  g.set_edge(0, 2, 1);
  return all_dual(g);
}

CondGraph path3() {
  CondGraph g(3);
  g.set_edge(0, 1, 1);
  g.set_edge(1, 2, 1);
  return all_dual(g);
}

CondGraph complete(int n) {
  CondGraph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.set_edge(i, j, 1);
  return all_dual(g);
}

CondGraph dual_majority_graph(bool valid) {
  CondGraph g(4);
  if (valid) {
    g.x1 = {1, 1, 1, 0};
    g.x2 = {1, 1, 1, 0};
  } else {
    g.x1 = {1, 1, 0, 0};  // exact tie, strict majority fails
    g.x2 = {1, 1, 1, 0};
  }
  return g;
}

}  // namespace

TEST_CASE("validity counts strict dual majorities") {
  const std::vector<CondGraph> graphs = {dual_majority_graph(true), dual_majority_graph(true),
                                         dual_majority_graph(false)};
  REQUIRE(validity(graphs) == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("validity is one when every node satisfies both conditions") {
  REQUIRE(validity({triangle(), complete(4)}) == 1.0);
}

TEST_CASE("a graph with exactly half its nodes dual-satisfying is invalid") {
  REQUIRE(validity({dual_majority_graph(false)}) == 0.0);
}

TEST_CASE("validity rejects an empty list") {
  REQUIRE_THROWS_AS(validity({}), std::invalid_argument);
}

TEST_CASE("validity is invariant under node relabeling") {
  Rng rng(2);
  CondGraph g = dual_majority_graph(true);
  g.set_edge(0, 3, 1);
  std::vector<int> perm = {2, 0, 3, 1};
  REQUIRE(validity({g}) == validity({permuted(g, perm)}));
}

TEST_CASE("relative errors vanish on identical lists") {
  const std::vector<CondGraph> graphs = {triangle(), complete(4), path3()};
  const RelErrors e = relative_error_ratios(graphs, graphs);
  REQUIRE(e.nodes == 0.0);
  REQUIRE(e.edges == 0.0);
  REQUIRE(e.density == 0.0);
}

TEST_CASE("relative edge error matches the direct formula") {
  // reference mean edges 10 (K5), generated mean edges 12
  CondGraph twelve = all_dual(CondGraph(6));
  int added = 0;
  for (int i = 0; i < 6 && added < 12; ++i)
    for (int j = i + 1; j < 6 && added < 12; ++j) {
      twelve.set_edge(i, j, 1);
      ++added;
    }
  REQUIRE(twelve.edge_count() == 12);
  const RelErrors e = relative_error_ratios({complete(5)}, {twelve});
  REQUIRE(e.edges == Catch::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("relative errors fail when the reference has no dual-satisfying nodes") {
  CondGraph bare(3);
  bare.set_edge(0, 1, 1);  // nobody satisfies the conditions
  REQUIRE_THROWS_AS(relative_error_ratios({bare}, {triangle()}), std::domain_error);
  REQUIRE_THROWS_AS(relative_error_ratios({}, {triangle()}), std::invalid_argument);
}

TEST_CASE("MMD of a list against itself is zero") {
  const std::vector<CondGraph> graphs = {triangle(), path3(), complete(4)};
  REQUIRE(mmd_clustering(graphs, graphs) <= 1e-12);
}

TEST_CASE("MMD of triangle versus path matches the hand evaluation") {
  // histograms are unit vectors at the last and first bin; the only pairwise
  // distance is sqrt(2), so sigma = sqrt(2) and MMD^2 = 2 - 2 exp(-1/2)
  double sigma = 0.0;
  const double v = mmd_clustering({triangle()}, {path3()}, &sigma);
  REQUIRE(sigma == Catch::Approx(std::sqrt(2.0)).epsilon(1e-12));
  REQUIRE(v == Catch::Approx(2.0 - 2.0 * std::exp(-0.5)).epsilon(1e-12));
  REQUIRE(v == Catch::Approx(0.786938680574733).epsilon(1e-9));
}

TEST_CASE("duplicating every graph leaves the V-statistic unchanged") {
  const std::vector<CondGraph> ref = {triangle()};
  const std::vector<CondGraph> gen = {path3()};
  const std::vector<CondGraph> ref2 = {triangle(), triangle()};
  const std::vector<CondGraph> gen2 = {path3(), path3()};
  REQUIRE(mmd_clustering(ref2, gen2) == Catch::Approx(mmd_clustering(ref, gen)).margin(1e-12));

  const std::vector<CondGraph> mixed = {triangle(), complete(4), path3()};
  std::vector<CondGraph> doubled;
  for (const CondGraph& g : mixed) {
    doubled.push_back(g);
    doubled.push_back(g);
  }
  REQUIRE(mmd_clustering(doubled, doubled) <= 1e-12);
}

TEST_CASE("MMD is symmetric and nonnegative") {
  const std::vector<CondGraph> a = {triangle(), complete(4)};
  const std::vector<CondGraph> b = {path3(), complete(5)};
  const double ab = mmd_clustering(a, b);
  const double ba = mmd_clustering(b, a);
  REQUIRE(ab == Catch::Approx(ba).margin(1e-15));
  REQUIRE(ab >= 0.0);
}

TEST_CASE("MMD requires a qualifying graph on each side") {
  CondGraph bare(3);
  REQUIRE_THROWS_AS(mmd_clustering({bare}, {triangle()}), std::domain_error);
  REQUIRE_THROWS_AS(mmd_clustering({triangle()}, {bare}), std::domain_error);
}

TEST_CASE("graphs with empty dual subgraphs are excluded from MMD but not validity") {
  CondGraph bare(4);
  bare.set_edge(0, 1, 1);
  const std::vector<CondGraph> gen = {triangle(), bare};
  // bare contributes validity 0 but must not break the MMD
  REQUIRE(validity(gen) == 0.5);
  REQUIRE_NOTHROW(mmd_clustering({triangle()}, gen));
}

TEST_CASE("evaluate aggregates all metrics") {
  const std::vector<CondGraph> graphs = {triangle(), complete(4)};
  const EvalReport r = evaluate(graphs, graphs);
  REQUIRE(r.validity == 1.0);
  REQUIRE(r.rel_err_nodes == 0.0);
  REQUIRE(r.rel_err_edges == 0.0);
  REQUIRE(r.rel_err_density == 0.0);
  REQUIRE(r.mmd_clustering <= 1e-12);
  REQUIRE(r.reference_count == 2);
  REQUIRE(r.generated_count == 2);
  REQUIRE(r.reference_qualifying == 2);
  REQUIRE(r.mmd_bins == 10);
  REQUIRE(r.mmd_kernel == "gaussian");
  REQUIRE_THROWS_AS(evaluate(graphs, {}), std::invalid_argument);
}

TEST_CASE("single-node dual subgraphs land in the first clustering bin") {
  // one dual node, clustering 0: the histogram must be e_1, like the path
  CondGraph g(3);
  g.x1 = {1, 0, 0};
  g.x2 = {1, 0, 0};
  g.set_edge(0, 1, 1);
  const double v = mmd_clustering({g}, {path3()});
  REQUIRE(v <= 1e-12);
}

TEST_CASE("metrics are exactly invariant under per-graph relabeling") {
  Rng rng(33);
  std::vector<CondGraph> base, moved;
  for (int k = 0; k < 6; ++k) {
    CondGraph g(5);
    for (int i = 0; i < 5; ++i) {
      g.x1[i] = rng.bernoulli(0.7);
      g.x2[i] = rng.bernoulli(0.7);
    }
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j)
        if (rng.bernoulli(0.5)) g.set_edge(i, j, 1);
    base.push_back(g);
    std::vector<int> perm = {4, 2, 0, 1, 3};
    moved.push_back(permuted(g, perm));
  }
  REQUIRE(validity(moved) == validity(base));
  const RelErrors eb = relative_error_ratios(base, base);
  const RelErrors em = relative_error_ratios(moved, moved);
  REQUIRE(eb.nodes == em.nodes);
  REQUIRE(eb.edges == em.edges);
  REQUIRE(eb.density == em.density);
  REQUIRE(mmd_clustering(base, base) == mmd_clustering(moved, moved));
  REQUIRE(mmd_clustering(base, moved) <= 1e-12);
}
