#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cdgraph {

// Undirected simple graph with two binary condition flags per node.
// Adjacency is stored as a dense symmetric 0/1 matrix with a zero diagonal.
// Graphs are treated as immutable values once built; the setters exist for
// construction only.
struct CondGraph {
  int n = 0;
  std::vector<std::uint8_t> adj;  // row-major n*n
  std::vector<std::uint8_t> x1;   // satisfaction of condition 1
  std::vector<std::uint8_t> x2;   // satisfaction of condition 2

  CondGraph() = default;
  explicit CondGraph(int nodes)
      : n(nodes),
        adj(static_cast<std::size_t>(nodes) * static_cast<std::size_t>(nodes), 0),
        x1(nodes, 0),
        x2(nodes, 0) {}

  std::uint8_t edge(int i, int j) const {
    return adj[static_cast<std::size_t>(i) * n + j];
  }

  void set_edge(int i, int j, std::uint8_t v) {
    if (i == j) throw std::invalid_argument("self-loops are not allowed");
    adj[static_cast<std::size_t>(i) * n + j] = v;
    adj[static_cast<std::size_t>(j) * n + i] = v;
  }

  const std::vector<std::uint8_t>& cond(int index) const {
    if (index == 1) return x1;
    if (index == 2) return x2;
    throw std::invalid_argument("condition index must be 1 or 2");
  }

  std::vector<std::uint8_t>& cond(int index) {
    if (index == 1) return x1;
    if (index == 2) return x2;
    throw std::invalid_argument("condition index must be 1 or 2");
  }

  int degree(int i) const {
    int d = 0;
    for (int j = 0; j < n; ++j) d += edge(i, j);
    return d;
  }

  int edge_count() const {
    int m = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) m += edge(i, j);
    return m;
  }

  bool operator==(const CondGraph&) const = default;
};

// Structural invariants: sizes, 0/1 entries, symmetry, zero diagonal.
// Node-count bounds are checked where corpora enter the system, not here,
// because ego-net extraction legitimately consumes graphs with n > 100.
inline void validate(const CondGraph& g) {
  if (g.n < 0) throw std::invalid_argument("negative node count");
  const std::size_t nn = static_cast<std::size_t>(g.n);
  if (g.adj.size() != nn * nn || g.x1.size() != nn || g.x2.size() != nn)
    throw std::invalid_argument("graph field sizes do not match node count");
  for (std::uint8_t b : g.x1)
    if (b > 1) throw std::invalid_argument("x1 entries must be 0 or 1");
  for (std::uint8_t b : g.x2)
    if (b > 1) throw std::invalid_argument("x2 entries must be 0 or 1");
  for (int i = 0; i < g.n; ++i) {
    if (g.edge(i, i) != 0) throw std::invalid_argument("nonzero diagonal in adjacency");
    for (int j = 0; j < g.n; ++j) {
      if (g.edge(i, j) > 1) throw std::invalid_argument("adjacency entries must be 0 or 1");
      if (g.edge(i, j) != g.edge(j, i)) throw std::invalid_argument("adjacency not symmetric");
    }
  }
}

struct GraphStats {
  int node_count = 0;
  int edge_count = 0;
  double density = 0.0;
  std::vector<double> clustering;
};

// Local clustering coefficient per node: 2*triangles / (deg*(deg-1)),
// zero for degree < 2. Triangle counts are integers, so the result is exactly
// invariant under node relabeling.
inline std::vector<double> clustering_coefficients(const CondGraph& g) {
  std::vector<double> out(g.n, 0.0);
  std::vector<int> nbrs;
  for (int i = 0; i < g.n; ++i) {
    nbrs.clear();
    for (int j = 0; j < g.n; ++j)
      if (g.edge(i, j)) nbrs.push_back(j);
    const int d = static_cast<int>(nbrs.size());
    if (d < 2) continue;
    int tri = 0;
    for (std::size_t a = 0; a < nbrs.size(); ++a)
      for (std::size_t b = a + 1; b < nbrs.size(); ++b)
        tri += g.edge(nbrs[a], nbrs[b]);
    out[i] = 2.0 * tri / (static_cast<double>(d) * (d - 1));
  }
  return out;
}

// Subgraph induced by nodes satisfying both conditions, node order preserved.
// Returns the empty graph when no node qualifies; callers must handle n == 0.
inline CondGraph induced_dual_subgraph(const CondGraph& g) {
  std::vector<int> keep;
  for (int i = 0; i < g.n; ++i)
    if (g.x1[i] && g.x2[i]) keep.push_back(i);
  CondGraph sub(static_cast<int>(keep.size()));
  for (std::size_t a = 0; a < keep.size(); ++a) {
    sub.x1[a] = 1;
    sub.x2[a] = 1;
    for (std::size_t b = a + 1; b < keep.size(); ++b)
      if (g.edge(keep[a], keep[b])) sub.set_edge(static_cast<int>(a), static_cast<int>(b), 1);
  }
  return sub;
}

// Phi coefficient (Pearson correlation of two binary variables) of the two
// condition vectors pooled over all nodes of all graphs.
inline double condition_correlation(const std::vector<CondGraph>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("condition correlation of empty corpus");
  double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
  for (const CondGraph& g : corpus) {
    for (int i = 0; i < g.n; ++i) {
      if (g.x1[i] && g.x2[i]) ++n11;
      else if (g.x1[i]) ++n10;
      else if (g.x2[i]) ++n01;
      else ++n00;
    }
  }
  const double total = n11 + n10 + n01 + n00;
  if (total < 2) throw std::invalid_argument("condition correlation needs at least 2 pooled nodes");
  const double r1 = n11 + n10, r0 = n01 + n00;  // x1 margins
  const double c1 = n11 + n01, c0 = n10 + n00;  // x2 margins
  if (r1 == 0 || r0 == 0 || c1 == 0 || c0 == 0)
    throw std::domain_error("condition correlation undefined: a pooled condition vector is constant");
  return (n11 * n00 - n10 * n01) / std::sqrt(r1 * r0 * c1 * c0);
}

inline GraphStats graph_stats(const CondGraph& g) {
  GraphStats s;
  s.node_count = g.n;
  s.edge_count = g.edge_count();
  s.density = g.n >= 2 ? 2.0 * s.edge_count / (static_cast<double>(g.n) * (g.n - 1)) : 0.0;
  s.clustering = clustering_coefficients(g);
  return s;
}

// Relabel nodes: node i of g becomes node perm[i] of the result.
inline CondGraph permuted(const CondGraph& g, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != g.n)
    throw std::invalid_argument("permutation size does not match node count");
  CondGraph out(g.n);
  for (int i = 0; i < g.n; ++i) {
    out.x1[perm[i]] = g.x1[i];
    out.x2[perm[i]] = g.x2[i];
    for (int j = i + 1; j < g.n; ++j)
      if (g.edge(i, j)) out.set_edge(perm[i], perm[j], 1);
  }
  return out;
}

// Graph-level condition labels: 1 iff strictly more than half of the nodes
// satisfy the condition. Ties at exactly n/2 count as 0.
struct MajorityLabel {
  int label_c1 = 0;
  int label_c2 = 0;
};

inline MajorityLabel majority_label(const CondGraph& g) {
  if (g.n < 1) throw std::invalid_argument("majority label of empty graph");
  int s1 = 0, s2 = 0;
  for (int i = 0; i < g.n; ++i) {
    s1 += g.x1[i];
    s2 += g.x2[i];
  }
  return {2 * s1 > g.n ? 1 : 0, 2 * s2 > g.n ? 1 : 0};
}

}  // namespace cdgraph
