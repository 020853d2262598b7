#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdgraph/denoiser.hpp"
#include "cdgraph/features.hpp"
#include "cdgraph/forward.hpp"
#include "cdgraph/graph.hpp"
#include "cdgraph/nn.hpp"
#include "cdgraph/rng.hpp"

namespace cdgraph {

// Graph-level probabilistic classifier: the denoiser trunk followed by a
// mean-pooled logistic readout. Parameters: trunk, then w_read (H), b_read.
struct ClassifierModel {
  DenoiserHyper hyper;
  std::vector<double> params;
  std::string role;          // "outer" or "inner"
  int target_condition = 0;  // condition whose majority label it predicts
};

inline std::size_t classifier_param_count(const DenoiserHyper& h) {
  return trunk_param_count(trunk_config(h)) + h.hidden + 1;
}

inline ClassifierModel init_classifier(const DenoiserHyper& hyper, std::uint64_t seed,
                                       std::string role, int target_condition) {
  ClassifierModel m;
  m.hyper = hyper;
  m.role = std::move(role);
  m.target_condition = target_condition;
  m.params.assign(classifier_param_count(hyper), 0.0);
  Rng rng(seed);
  const TrunkConfig tc = trunk_config(hyper);
  init_trunk_params(m.params, tc, rng);
  const double s = 1.0 / std::sqrt(static_cast<double>(hyper.hidden));
  for (std::size_t k = trunk_param_count(tc); k < m.params.size(); ++k)
    m.params[k] = (2.0 * rng.next_double() - 1.0) * s;
  return m;
}

// P(label = 1 | noisy graph), strictly inside (0,1).
inline double classifier_eval(const ClassifierModel& model, const FeatureTensor& feats,
                              const NoisyGraph& noisy) {
  const CondGraph& g = noisy.graph;
  if (feats.n != g.n) throw std::invalid_argument("feature tensor does not match graph");
  const int H = model.hyper.hidden;
  const TrunkConfig tc = trunk_config(model.hyper);
  const std::vector<double> inputs = detail::assemble_node_inputs(feats);
  TrunkTrace trace;
  trunk_forward(model.params, tc, g, inputs, trace);
  const std::vector<double>& hL = trace.h[tc.rounds];
  const double* w = model.params.data() + trunk_param_count(tc);
  const double b = w[H];
  double z = b;
  for (int r = 0; r < H; ++r) {
    double pool = 0.0;
    for (int i = 0; i < g.n; ++i) pool += hL[static_cast<std::size_t>(i) * H + r];
    z += w[r] * (pool / g.n);
  }
  return clamp_prob(logistic(z));
}

inline double classifier_eval(const ClassifierModel& model, const NoisyGraph& noisy,
                              int total_steps) {
  return classifier_eval(model, extract_features(noisy, total_steps), noisy);
}

namespace detail {

inline double classifier_loss_grad(const ClassifierModel& model, const FeatureTensor& feats,
                                   const NoisyGraph& noisy, int label,
                                   std::vector<double>& grad) {
  const CondGraph& g = noisy.graph;
  const int H = model.hyper.hidden;
  const TrunkConfig tc = trunk_config(model.hyper);
  const std::vector<double> inputs = assemble_node_inputs(feats);
  TrunkTrace trace;
  trunk_forward(model.params, tc, g, inputs, trace);
  const std::vector<double>& hL = trace.h[tc.rounds];
  const double* w = model.params.data() + trunk_param_count(tc);
  std::vector<double> pool(H, 0.0);
  for (int i = 0; i < g.n; ++i)
    for (int r = 0; r < H; ++r) pool[r] += hL[static_cast<std::size_t>(i) * H + r];
  double z = w[H];
  for (int r = 0; r < H; ++r) z += w[r] * (pool[r] / g.n);
  const double p = logistic(z);
  const double loss_val = binary_cross_entropy(p, label);
  const bool clamped = p < kProbClamp || p > 1.0 - kProbClamp;
  const double dz = clamped ? 0.0 : p - label;
  double* g_w = grad.data() + trunk_param_count(tc);
  for (int r = 0; r < H; ++r) g_w[r] += dz * (pool[r] / g.n);
  g_w[H] += dz;
  std::vector<double> d_hL(static_cast<std::size_t>(g.n) * H);
  for (int i = 0; i < g.n; ++i)
    for (int r = 0; r < H; ++r)
      d_hL[static_cast<std::size_t>(i) * H + r] = dz * w[r] / g.n;
  trunk_backward(model.params, tc, g, inputs, trace, d_hL, grad.data());
  return loss_val;
}

}  // namespace detail

// The hierarchical dual-condition pair: outer estimates q(c_out = 1 | G^t),
// inner estimates q(c_in = 1 | G^t, c_out = 1) and is trained only on graphs
// whose outer majority label is 1.
struct GuidanceClassifiers {
  ClassifierModel outer;
  ClassifierModel inner;
  int outer_condition = 2;
};

struct ClassifierTrainConfig {
  AdamParams adam;
  int batch = 8;
  int steps = 2000;
  std::uint64_t seed = 2;
  int outer_condition = 2;
};

struct ClassifierTrainResult {
  GuidanceClassifiers classifiers;
  std::vector<double> outer_trace;
  std::vector<double> inner_trace;
};

namespace detail {

inline std::vector<double> train_one_classifier(ClassifierModel& model,
                                                const std::vector<const CondGraph*>& pool,
                                                const std::vector<int>& labels,
                                                const NoiseSchedule& schedule,
                                                const ClassifierTrainConfig& cfg,
                                                std::uint64_t seed) {
  Rng rng(seed);
  Adam opt(model.params.size(), cfg.adam);
  std::vector<double> grad_sum(model.params.size());
  std::vector<double> trace;
  trace.reserve(cfg.steps);
  for (int step = 0; step < cfg.steps; ++step) {
    std::fill(grad_sum.begin(), grad_sum.end(), 0.0);
    double batch_loss = 0.0;
    for (int b = 0; b < cfg.batch; ++b) {
      const std::size_t k = rng.next_below(pool.size());
      const int t = rng.next_int(1, schedule.T);
      const NoisyGraph noisy = corrupt(*pool[k], schedule, t, rng.next_u64());
      const FeatureTensor feats = extract_features(noisy, schedule.T);
      batch_loss += classifier_loss_grad(model, feats, noisy, labels[k], grad_sum);
    }
    trace.push_back(batch_loss / cfg.batch);
    opt.step(model.params, grad_sum);
  }
  return trace;
}

}  // namespace detail

inline ClassifierTrainResult train_classifiers(const std::vector<CondGraph>& corpus,
                                               const NoiseSchedule& schedule,
                                               const DenoiserHyper& hyper,
                                               const ClassifierTrainConfig& cfg) {
  if (cfg.outer_condition != 1 && cfg.outer_condition != 2)
    throw std::invalid_argument("outer condition must be 1 or 2");
  if (corpus.empty()) throw std::invalid_argument("classifier corpus is empty");
  const int inner_condition = cfg.outer_condition == 2 ? 1 : 2;

  std::vector<const CondGraph*> outer_pool;
  std::vector<int> outer_labels;
  std::vector<const CondGraph*> inner_pool;
  std::vector<int> inner_labels;
  for (const CondGraph& g : corpus) {
    const MajorityLabel lab = majority_label(g);
    const int outer = cfg.outer_condition == 2 ? lab.label_c2 : lab.label_c1;
    const int inner = cfg.outer_condition == 2 ? lab.label_c1 : lab.label_c2;
    outer_pool.push_back(&g);
    outer_labels.push_back(outer);
    if (outer == 1) {
      inner_pool.push_back(&g);
      inner_labels.push_back(inner);
    }
  }
  bool has0 = false, has1 = false;
  for (int l : outer_labels) (l ? has1 : has0) = true;
  if (!has0 || !has1)
    throw std::invalid_argument("degenerate outer label distribution: both classes required");
  if (inner_pool.empty())
    throw std::invalid_argument("inner training set is empty: no graph satisfies the outer label");

  ClassifierTrainResult out;
  out.classifiers.outer_condition = cfg.outer_condition;
  out.classifiers.outer =
      init_classifier(hyper, derive_seed(cfg.seed, 0), "outer", cfg.outer_condition);
  out.classifiers.inner =
      init_classifier(hyper, derive_seed(cfg.seed, 1), "inner", inner_condition);
  out.outer_trace = detail::train_one_classifier(out.classifiers.outer, outer_pool, outer_labels,
                                                 schedule, cfg, derive_seed(cfg.seed, 2));
  out.inner_trace = detail::train_one_classifier(out.classifiers.inner, inner_pool, inner_labels,
                                                 schedule, cfg, derive_seed(cfg.seed, 3));
  return out;
}

// Multiplicative reweighting of a Bernoulli parameter by a classifier
// likelihood ratio raised to the guidance strength. Fixes 0 and 1; gamma = 0
// or ratio = 1 return p_model unchanged, bit for bit.
inline double guide_bernoulli(double p_model, double ratio, double gamma) {
  if (!(ratio > 0.0) || !std::isfinite(ratio))
    throw std::invalid_argument("ratio must be a positive finite real");
  if (p_model <= 0.0) return 0.0;
  if (p_model >= 1.0) return 1.0;
  if (gamma == 0.0 || ratio == 1.0) return p_model;
  const double w = std::pow(ratio, gamma);
  if (std::isinf(w)) return 1.0;
  if (w == 0.0) return 0.0;
  return p_model * w / (p_model * w + (1.0 - p_model));
}

// Per-variable likelihood ratios between the value-1 and value-0 completions,
// all other variables held at their current values. Node-bit variants reuse
// the structural features of the current graph (the structure is unchanged);
// edge variants are re-extracted in full.
struct VariableRatios {
  int n = 0;
  std::vector<double> node1;  // per node, condition 1
  std::vector<double> node2;
  std::vector<double> edge;   // n*n symmetric, diagonal 1

  double edge_ratio(int i, int j) const { return edge[static_cast<std::size_t>(i) * n + j]; }
};

inline VariableRatios classifier_ratios(const GuidanceClassifiers& classifiers,
                                        const NoisyGraph& noisy, int total_steps,
                                        bool hard_gate = false) {
  const CondGraph& g = noisy.graph;
  VariableRatios out;
  out.n = g.n;
  out.node1.assign(g.n, 1.0);
  out.node2.assign(g.n, 1.0);
  out.edge.assign(static_cast<std::size_t>(g.n) * g.n, 1.0);

  const FeatureTensor base = extract_features(noisy, total_steps);
  bool use_inner = true;
  if (hard_gate)
    use_inner = classifier_eval(classifiers.outer, base, noisy) > 0.5;

  const auto weight = [&](const FeatureTensor& feats, const NoisyGraph& variant) {
    double w = classifier_eval(classifiers.outer, feats, variant);
    if (use_inner) w *= classifier_eval(classifiers.inner, feats, variant);
    return w;
  };

  // node condition bits: structure is unchanged, patch the feature column
  for (int cond = 1; cond <= 2; ++cond) {
    std::vector<double>& dest = cond == 1 ? out.node1 : out.node2;
    NoisyGraph variant = noisy;
    FeatureTensor feats = base;
    for (int i = 0; i < g.n; ++i) {
      const std::size_t at = static_cast<std::size_t>(i) * kNodeFeatureDim + (cond - 1);
      variant.graph.cond(cond)[i] = 1;
      feats.node_feats[at] = 1.0;
      const double w1 = weight(feats, variant);
      variant.graph.cond(cond)[i] = 0;
      feats.node_feats[at] = 0.0;
      const double w0 = weight(feats, variant);
      variant.graph.cond(cond)[i] = g.cond(cond)[i];
      feats.node_feats[at] = base.node_feats[at];
      dest[i] = w1 / w0;
    }
  }

  // edge bits: adjacency changes, so features are re-extracted per variant
  NoisyGraph variant = noisy;
  for (int i = 0; i < g.n; ++i) {
    for (int j = i + 1; j < g.n; ++j) {
      variant.graph.set_edge(i, j, 1);
      const double w1 = weight(extract_features(variant, total_steps), variant);
      variant.graph.set_edge(i, j, 0);
      const double w0 = weight(extract_features(variant, total_steps), variant);
      variant.graph.set_edge(i, j, g.edge(i, j));
      const double r = w1 / w0;
      out.edge[static_cast<std::size_t>(i) * g.n + j] = r;
      out.edge[static_cast<std::size_t>(j) * g.n + i] = r;
    }
  }
  return out;
}

}  // namespace cdgraph
