#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cdgraph/graph.hpp"
#include "cdgraph/rng.hpp"

namespace cdgraph {

// Synthetic corpus with planted homophily (edges prefer attribute-agreeing
// pairs) and a controlled phi correlation between the two condition bits.
struct SynthConfig {
  int num_graphs = 200;
  int n_min = 6;
  int n_max = 12;
  double rho_target = 0.0;
  double p_in = 0.6;
  double p_out = 0.1;
  double base_rate = 0.5;
  std::uint64_t seed = 7;
};

// Contingency cells of the bivariate Bernoulli with equal marginals r and
// correlation rho: p11 = r^2 + rho * r * (1 - r), the rest forced by margins.
struct BernoulliCells {
  double p11, p10, p01, p00;
};

inline BernoulliCells bivariate_cells(double base_rate, double rho) {
  const double r = base_rate;
  BernoulliCells c;
  c.p11 = r * r + rho * r * (1.0 - r);
  c.p10 = r - c.p11;
  c.p01 = r - c.p11;
  c.p00 = 1.0 - 2.0 * r + c.p11;
  return c;
}

inline void validate(const SynthConfig& cfg) {
  if (cfg.num_graphs < 1) throw std::invalid_argument("num_graphs must be at least 1");
  if (cfg.n_min < 1 || cfg.n_max > 100 || cfg.n_min > cfg.n_max)
    throw std::invalid_argument("node counts must satisfy 1 <= n_min <= n_max <= 100");
  if (!(cfg.p_out > 0.0 && cfg.p_in < 1.0 && cfg.p_in >= cfg.p_out))
    throw std::invalid_argument("edge probabilities must satisfy 0 < p_out <= p_in < 1");
  if (!(cfg.base_rate > 0.0 && cfg.base_rate <= 1.0))
    throw std::invalid_argument("base_rate must lie in (0,1]");
  if (!(cfg.rho_target > -1.0 && cfg.rho_target < 1.0))
    throw std::invalid_argument("rho_target must lie in (-1,1)");
  const BernoulliCells c = bivariate_cells(cfg.base_rate, cfg.rho_target);
  const double tol = -1e-12;
  if (c.p11 < tol || c.p10 < tol || c.p01 < tol || c.p00 < tol)
    throw std::invalid_argument(
        "correlation target unreachable for the given base_rate (bivariate Bernoulli "
        "feasibility bound violated)");
}

namespace detail {

inline CondGraph synth_graph(const SynthConfig& cfg, const BernoulliCells& cells,
                             std::uint64_t seed) {
  Rng rng(seed);
  const int n = rng.next_int(cfg.n_min, cfg.n_max);
  CondGraph g(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    if (u < cells.p11) {
      g.x1[i] = 1;
      g.x2[i] = 1;
    } else if (u < cells.p11 + cells.p10) {
      g.x1[i] = 1;
    } else if (u < cells.p11 + cells.p10 + cells.p01) {
      g.x2[i] = 1;
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const bool agree = g.x1[i] == g.x1[j] && g.x2[i] == g.x2[j];
      if (rng.bernoulli(agree ? cfg.p_in : cfg.p_out)) g.set_edge(i, j, 1);
    }
  return g;
}

}  // namespace detail

// Draws the corpus, then validates the measured pooled phi against the target
// (tolerance 0.1), redrawing with a fresh derived seed up to 10 times. The
// check is skipped when phi is undefined (a pooled condition vector is
// constant, e.g. base_rate = 1).
inline std::vector<CondGraph> generate_corpus(const SynthConfig& cfg) {
  validate(cfg);
  const BernoulliCells cells = bivariate_cells(cfg.base_rate, cfg.rho_target);
  for (int attempt = 0; attempt < 10; ++attempt) {
    const std::uint64_t attempt_seed = derive_seed(cfg.seed, 1000003ULL + attempt);
    std::vector<CondGraph> corpus;
    corpus.reserve(cfg.num_graphs);
    for (int k = 0; k < cfg.num_graphs; ++k)
      corpus.push_back(detail::synth_graph(cfg, cells, derive_seed(attempt_seed, k)));
    try {
      if (std::abs(condition_correlation(corpus) - cfg.rho_target) > 0.1) continue;
    } catch (const std::domain_error&) {
      // constant pooled vector: correlation undefined, accept the draw
    }
    return corpus;
  }
  throw std::runtime_error("failed to hit the correlation target within 10 corpus draws");
}

// Ego networks: for each node, the subgraph induced by the node and its
// neighbors, original node order preserved. Nets larger than max_n are
// discarded. Output is ordered by ego index.
inline std::vector<CondGraph> extract_ego_nets(const CondGraph& g, int max_n = 100) {
  std::vector<CondGraph> out;
  std::vector<int> members;
  for (int ego = 0; ego < g.n; ++ego) {
    members.clear();
    for (int j = 0; j < g.n; ++j)
      if (j == ego || g.edge(ego, j)) members.push_back(j);
    if (static_cast<int>(members.size()) > max_n) continue;
    CondGraph net(static_cast<int>(members.size()));
    for (std::size_t a = 0; a < members.size(); ++a) {
      net.x1[a] = g.x1[members[a]];
      net.x2[a] = g.x2[members[a]];
      for (std::size_t b = a + 1; b < members.size(); ++b)
        if (g.edge(members[a], members[b]))
          net.set_edge(static_cast<int>(a), static_cast<int>(b), 1);
    }
    out.push_back(std::move(net));
  }
  return out;
}

}  // namespace cdgraph
