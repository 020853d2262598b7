#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "cdgraph/forward.hpp"
#include "cdgraph/graph.hpp"

namespace cdgraph {

constexpr int kNodeFeatureDim = 4;   // cond1 bit, cond2 bit, normalized degree, clustering
constexpr int kGraphFeatureDim = 5;  // density, two largest Laplacian eigenvalues, time sin/cos

// Structural and spectral features consumed by the denoiser and classifiers.
struct FeatureTensor {
  int n = 0;
  std::vector<double> node_feats;          // row-major n x kNodeFeatureDim
  std::array<double, kGraphFeatureDim> graph_feats{};

  double node(int i, int f) const { return node_feats[static_cast<std::size_t>(i) * kNodeFeatureDim + f]; }
};

// Two largest eigenvalues of the symmetric normalized Laplacian, with
// L(i,i) = 0 for isolated nodes, so the empty graph maps to the zero matrix.
inline std::array<double, 2> laplacian_top_eigenvalues(const CondGraph& g) {
  if (g.n < 1) return {0.0, 0.0};
  std::vector<double> inv_sqrt_deg(g.n, 0.0);
  bool any_edge = false;
  for (int i = 0; i < g.n; ++i) {
    const int d = g.degree(i);
    if (d > 0) {
      inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(d));
      any_edge = true;
    }
  }
  if (!any_edge) return {0.0, 0.0};
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    if (inv_sqrt_deg[i] > 0.0) lap(i, i) = 1.0;
    for (int j = 0; j < g.n; ++j)
      if (g.edge(i, j)) lap(i, j) = -inv_sqrt_deg[i] * inv_sqrt_deg[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
  const double top = ev(g.n - 1);
  const double second = g.n >= 2 ? ev(g.n - 2) : 0.0;
  return {top, second};
}

inline FeatureTensor extract_features(const NoisyGraph& noisy, int total_steps) {
  const CondGraph& g = noisy.graph;
  FeatureTensor f;
  f.n = g.n;
  f.node_feats.resize(static_cast<std::size_t>(g.n) * kNodeFeatureDim);
  const std::vector<double> clus = clustering_coefficients(g);
  for (int i = 0; i < g.n; ++i) {
    double* row = f.node_feats.data() + static_cast<std::size_t>(i) * kNodeFeatureDim;
    row[0] = g.x1[i];
    row[1] = g.x2[i];
    row[2] = g.n >= 2 ? static_cast<double>(g.degree(i)) / (g.n - 1) : 0.0;
    row[3] = clus[i];
  }
  const std::array<double, 2> eig = laplacian_top_eigenvalues(g);
  const double density =
      g.n >= 2 ? 2.0 * g.edge_count() / (static_cast<double>(g.n) * (g.n - 1)) : 0.0;
  const double phase = 2.0 * M_PI * static_cast<double>(noisy.t) / total_steps;
  f.graph_feats = {density, eig[0], eig[1], std::sin(phase), std::cos(phase)};
  return f;
}

}  // namespace cdgraph
