#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdgraph/graph.hpp"

namespace cdgraph {

constexpr int kMmdBins = 10;
constexpr double kMmdSigmaFloor = 1e-6;

struct EvalReport {
  double validity = 0.0;
  double rel_err_nodes = 0.0;
  double rel_err_edges = 0.0;
  double rel_err_density = 0.0;
  double mmd_clustering = 0.0;
  int reference_count = 0;
  int generated_count = 0;
  // recorded metric choices, so reported numbers are reproducible
  int mmd_bins = kMmdBins;
  double mmd_sigma = 0.0;
  std::string mmd_kernel = "gaussian";
  std::string mmd_estimator = "v-statistic";
  int reference_qualifying = 0;
  int generated_qualifying = 0;

  bool operator==(const EvalReport&) const = default;
};

// Fraction of graphs in which strictly more than half the nodes satisfy
// condition 1 and strictly more than half satisfy condition 2.
inline double validity(const std::vector<CondGraph>& generated) {
  if (generated.empty()) throw std::invalid_argument("validity of empty graph list");
  int valid = 0;
  for (const CondGraph& g : generated) {
    const MajorityLabel lab = majority_label(g);
    if (lab.label_c1 && lab.label_c2) ++valid;
  }
  return static_cast<double>(valid) / static_cast<double>(generated.size());
}

struct RelErrors {
  double nodes = 0.0;
  double edges = 0.0;
  double density = 0.0;
};

namespace detail {

struct SideStats {
  double mean_nodes = 0.0;    // over all graphs, empty induced subgraphs count 0
  double mean_edges = 0.0;    // over graphs with a nonempty induced subgraph
  double mean_density = 0.0;  // same restriction
  int qualifying = 0;
};

inline SideStats dual_subgraph_stats(const std::vector<CondGraph>& graphs, const char* side) {
  SideStats s;
  double sum_nodes = 0.0, sum_edges = 0.0, sum_density = 0.0;
  for (const CondGraph& g : graphs) {
    const CondGraph sub = induced_dual_subgraph(g);
    sum_nodes += sub.n;
    if (sub.n == 0) continue;
    ++s.qualifying;
    sum_edges += sub.edge_count();
    sum_density += sub.n >= 2
                       ? 2.0 * sub.edge_count() / (static_cast<double>(sub.n) * (sub.n - 1))
                       : 0.0;
  }
  s.mean_nodes = sum_nodes / static_cast<double>(graphs.size());
  if (s.qualifying == 0)
    throw std::domain_error(std::string("no ") + side +
                            " graph has a nonempty dual-satisfying induced subgraph");
  s.mean_edges = sum_edges / s.qualifying;
  s.mean_density = sum_density / s.qualifying;
  return s;
}

}  // namespace detail

// Relative differences of mean node count, mean edge count, and mean density
// of the dual-satisfying induced subgraphs.
inline RelErrors relative_error_ratios(const std::vector<CondGraph>& reference,
                                       const std::vector<CondGraph>& generated) {
  if (reference.empty() || generated.empty())
    throw std::invalid_argument("relative error ratios need nonempty graph lists");
  const detail::SideStats ref = detail::dual_subgraph_stats(reference, "reference");
  const detail::SideStats gen = detail::dual_subgraph_stats(generated, "generated");
  RelErrors out;
  const auto ratio = [](double r, double g, const char* what) {
    if (r == 0.0)
      throw std::domain_error(std::string("reference average ") + what +
                              " is zero: relative error undefined");
    return std::abs(g - r) / r;
  };
  out.nodes = ratio(ref.mean_nodes, gen.mean_nodes, "node count");
  out.edges = ratio(ref.mean_edges, gen.mean_edges, "edge count");
  out.density = ratio(ref.mean_density, gen.mean_density, "density");
  return out;
}

namespace detail {

using Histogram = std::array<double, kMmdBins>;

// L1-normalized 10-bin histogram of the induced dual subgraph's clustering
// coefficients; graphs with an empty induced subgraph do not qualify.
inline std::vector<Histogram> clustering_histograms(const std::vector<CondGraph>& graphs) {
  std::vector<Histogram> out;
  for (const CondGraph& g : graphs) {
    const CondGraph sub = induced_dual_subgraph(g);
    if (sub.n == 0) continue;
    Histogram h{};
    for (double c : clustering_coefficients(sub)) {
      int bin = static_cast<int>(c * kMmdBins);
      if (bin >= kMmdBins) bin = kMmdBins - 1;  // c = 1.0 lands in [0.9, 1.0]
      h[bin] += 1.0;
    }
    for (double& v : h) v /= sub.n;
    out.push_back(h);
  }
  return out;
}

inline double hist_distance(const Histogram& a, const Histogram& b) {
  double s = 0.0;
  for (int k = 0; k < kMmdBins; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

// Median heuristic over unordered distinct pairs of the pooled histograms.
inline double median_pairwise_distance(const std::vector<Histogram>& pooled) {
  std::vector<double> d;
  for (std::size_t i = 0; i < pooled.size(); ++i)
    for (std::size_t j = i + 1; j < pooled.size(); ++j)
      d.push_back(hist_distance(pooled[i], pooled[j]));
  if (d.empty()) return 0.0;
  std::sort(d.begin(), d.end());
  const std::size_t m = d.size();
  return m % 2 == 1 ? d[m / 2] : (d[m / 2 - 1] + d[m / 2]) / 2.0;
}

}  // namespace detail

// Biased (V-statistic) squared MMD with Gaussian kernel between the two sets
// of clustering-coefficient histograms; bandwidth from the median heuristic
// with a 1e-6 floor.
inline double mmd_clustering(const std::vector<CondGraph>& reference,
                             const std::vector<CondGraph>& generated,
                             double* sigma_out = nullptr) {
  const std::vector<detail::Histogram> hx = detail::clustering_histograms(reference);
  const std::vector<detail::Histogram> hy = detail::clustering_histograms(generated);
  if (hx.empty() || hy.empty())
    throw std::domain_error("MMD undefined: a side has no graph with a nonempty dual subgraph");
  std::vector<detail::Histogram> pooled = hx;
  pooled.insert(pooled.end(), hy.begin(), hy.end());
  const double sigma = std::max(detail::median_pairwise_distance(pooled), kMmdSigmaFloor);
  if (sigma_out) *sigma_out = sigma;
  const double denom = 2.0 * sigma * sigma;
  const auto kernel_mean = [&](const std::vector<detail::Histogram>& a,
                               const std::vector<detail::Histogram>& b) {
    double s = 0.0;
    for (const detail::Histogram& u : a)
      for (const detail::Histogram& v : b) {
        const double d = detail::hist_distance(u, v);
        s += std::exp(-d * d / denom);
      }
    return s / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
  };
  const double v = kernel_mean(hx, hx) + kernel_mean(hy, hy) - 2.0 * kernel_mean(hx, hy);
  return v < 0.0 ? 0.0 : v;
}

inline EvalReport evaluate(const std::vector<CondGraph>& reference,
                           const std::vector<CondGraph>& generated) {
  if (reference.empty() || generated.empty())
    throw std::invalid_argument("evaluate needs nonempty reference and generated lists");
  EvalReport r;
  r.reference_count = static_cast<int>(reference.size());
  r.generated_count = static_cast<int>(generated.size());
  r.validity = validity(generated);
  const RelErrors errs = relative_error_ratios(reference, generated);
  r.rel_err_nodes = errs.nodes;
  r.rel_err_edges = errs.edges;
  r.rel_err_density = errs.density;
  r.mmd_clustering = mmd_clustering(reference, generated, &r.mmd_sigma);
  r.reference_qualifying = static_cast<int>(detail::clustering_histograms(reference).size());
  r.generated_qualifying = static_cast<int>(detail::clustering_histograms(generated).size());
  return r;
}

}  // namespace cdgraph
