#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cdgraph/graph.hpp"
#include "cdgraph/rng.hpp"
#include "cdgraph/schedule.hpp"

namespace cdgraph {

// A corrupted graph state at diffusion step t.
struct NoisyGraph {
  CondGraph graph;
  int t = 1;
};

// Probability that an edge endpoint copies its neighbor's condition bit.
struct ContagionParam {
  double p;

  explicit ContagionParam(double prob) : p(prob) {
    if (!(p > 0.5 && p < 1.0)) throw std::invalid_argument("contagion p must lie in (1/2, 1)");
  }
};

// Corrupt a clean graph to step t: every condition bit and every upper
// triangle adjacency bit flips independently with the cumulative flip
// probability, then symmetry is restored by mirroring. Draw order is fixed
// (x1 nodes, x2 nodes, pairs in lexicographic order) so results are
// deterministic given the seed.
inline NoisyGraph corrupt(const CondGraph& g, const NoiseSchedule& schedule, int t,
                          std::uint64_t seed) {
  check_step(schedule, t);
  const double flip = cumulative_kernel(schedule, t).flip;
  Rng rng(seed);
  NoisyGraph out{g, t};
  for (int i = 0; i < g.n; ++i)
    if (rng.bernoulli(flip)) out.graph.x1[i] ^= 1;
  for (int i = 0; i < g.n; ++i)
    if (rng.bernoulli(flip)) out.graph.x2[i] ^= 1;
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j)
      if (rng.bernoulli(flip)) out.graph.set_edge(i, j, out.graph.edge(i, j) ^ 1);
  return out;
}

// Social contagion factor: P(x_m = 1 | e_{m,n} = edge_present, x_n).
// With an edge, the endpoint matches its neighbor's bit with probability p.
// Without an edge the neighbor carries no information.
inline double contagion_conditional(ContagionParam param, int neighbor_bit, int edge_present) {
  check_bit(neighbor_bit);
  check_bit(edge_present);
  if (edge_present == 0) return 0.5;
  return neighbor_bit == 1 ? param.p : 1.0 - param.p;
}

// Social homophily factor: q(e_{m,n} = 1 | x_m) obtained by marginalizing the
// indicator kernel 1[x_m = x_n] against q(x_n = 1 | x_m) = neighbor_dist.
inline double homophily_edge_prob(int bit_m, double neighbor_dist) {
  check_bit(bit_m);
  if (!(neighbor_dist >= 0.0 && neighbor_dist <= 1.0))
    throw std::invalid_argument("neighbor_dist must lie in [0,1]");
  return bit_m == 1 ? neighbor_dist : 1.0 - neighbor_dist;
}

// Empirical estimate of the bivariate Bernoulli neighbor conditional
// q(x_n = 1 | x_m) for one condition, from the 2x2 contingency table of
// ordered adjacent node pairs across the corpus. Cells with no observations
// fall back to the uninformative 1/2.
struct NeighborConditional {
  double given1 = 0.5;  // q(x_n = 1 | x_m = 1)
  double given0 = 0.5;  // q(x_n = 1 | x_m = 0)
};

inline NeighborConditional estimate_neighbor_conditional(const std::vector<CondGraph>& corpus,
                                                         int condition_index) {
  double c11 = 0, c10 = 0, c01 = 0, c00 = 0;
  for (const CondGraph& g : corpus) {
    const std::vector<std::uint8_t>& x = g.cond(condition_index);
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) {
        if (i == j || !g.edge(i, j)) continue;
        if (x[i] && x[j]) ++c11;
        else if (x[i]) ++c10;
        else if (x[j]) ++c01;
        else ++c00;
      }
  }
  NeighborConditional out;
  if (c11 + c10 > 0) out.given1 = c11 / (c11 + c10);
  if (c01 + c00 > 0) out.given0 = c01 / (c01 + c00);
  return out;
}

}  // namespace cdgraph
