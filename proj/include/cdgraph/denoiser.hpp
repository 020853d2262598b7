#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cdgraph/features.hpp"
#include "cdgraph/forward.hpp"
#include "cdgraph/graph.hpp"
#include "cdgraph/nn.hpp"
#include "cdgraph/rng.hpp"
#include "cdgraph/schedule.hpp"

namespace cdgraph {

struct DenoiserHyper {
  int rounds = 2;
  int hidden = 32;
};

inline TrunkConfig trunk_config(const DenoiserHyper& h) {
  return {h.rounds, h.hidden, kNodeFeatureDim + kGraphFeatureDim};
}

// Trainable denoising network: shared message-passing trunk, one logistic
// head per condition vector, one symmetric logistic edge head.
// Head layout appended to the trunk parameters:
//   w_head1 (H), b_head1, w_head2 (H), b_head2, w_edge (2H+1), b_edge.
// The edge head consumes [h_i * h_j, h_i + h_j, current edge bit].
struct DenoiserModel {
  DenoiserHyper hyper;
  std::vector<double> params;
};

inline std::size_t denoiser_param_count(const DenoiserHyper& h) {
  const std::size_t H = static_cast<std::size_t>(h.hidden);
  return trunk_param_count(trunk_config(h)) + 2 * (H + 1) + (2 * H + 2);
}

inline DenoiserModel init_denoiser(const DenoiserHyper& hyper, std::uint64_t seed) {
  DenoiserModel m;
  m.hyper = hyper;
  m.params.assign(denoiser_param_count(hyper), 0.0);
  Rng rng(seed);
  const TrunkConfig tc = trunk_config(hyper);
  init_trunk_params(m.params, tc, rng);
  const std::size_t H = static_cast<std::size_t>(hyper.hidden);
  const double s_node = 1.0 / std::sqrt(static_cast<double>(H));
  const double s_edge = 1.0 / std::sqrt(static_cast<double>(2 * H + 1));
  double* head = m.params.data() + trunk_param_count(tc);
  for (std::size_t k = 0; k < 2 * (H + 1); ++k) head[k] = (2.0 * rng.next_double() - 1.0) * s_node;
  for (std::size_t k = 2 * (H + 1); k < 2 * (H + 1) + 2 * H + 2; ++k)
    head[k] = (2.0 * rng.next_double() - 1.0) * s_edge;
  return m;
}

// Predicted clean-graph probabilities, clamped into (0,1).
struct CleanPrediction {
  int n = 0;
  std::vector<double> px1;  // P(x1_i = 1)
  std::vector<double> px2;
  std::vector<double> pe;   // n*n symmetric, diagonal fixed at 0 and ignored

  double edge(int i, int j) const { return pe[static_cast<std::size_t>(i) * n + j]; }
};

namespace detail {

inline std::vector<double> assemble_node_inputs(const FeatureTensor& f) {
  const int D = kNodeFeatureDim + kGraphFeatureDim;
  std::vector<double> in(static_cast<std::size_t>(f.n) * D);
  for (int i = 0; i < f.n; ++i) {
    double* row = in.data() + static_cast<std::size_t>(i) * D;
    for (int k = 0; k < kNodeFeatureDim; ++k) row[k] = f.node(i, k);
    for (int k = 0; k < kGraphFeatureDim; ++k) row[kNodeFeatureDim + k] = f.graph_feats[k];
  }
  return in;
}

struct DenoiserHeads {
  const double* w1;
  double b1;
  const double* w2;
  double b2;
  const double* we;  // 2H+1 weights: product part, sum part, edge bit
  double be;
};

inline DenoiserHeads head_view(const DenoiserModel& m) {
  const std::size_t H = static_cast<std::size_t>(m.hyper.hidden);
  const double* p = m.params.data() + trunk_param_count(trunk_config(m.hyper));
  DenoiserHeads h;
  h.w1 = p;
  h.b1 = p[H];
  h.w2 = p + H + 1;
  h.b2 = p[2 * H + 1];
  h.we = p + 2 * (H + 1);
  h.be = p[2 * (H + 1) + 2 * H + 1];
  return h;
}

}  // namespace detail

inline CleanPrediction predict(const DenoiserModel& model, const FeatureTensor& feats,
                               const NoisyGraph& noisy) {
  const CondGraph& g = noisy.graph;
  if (feats.n != g.n) throw std::invalid_argument("feature tensor does not match graph");
  if (model.params.size() != denoiser_param_count(model.hyper))
    throw std::invalid_argument("denoiser parameter vector has wrong size");
  const int H = model.hyper.hidden;
  const TrunkConfig tc = trunk_config(model.hyper);
  const std::vector<double> inputs = detail::assemble_node_inputs(feats);
  TrunkTrace trace;
  trunk_forward(model.params, tc, g, inputs, trace);
  const std::vector<double>& hL = trace.h[tc.rounds];
  const detail::DenoiserHeads heads = detail::head_view(model);

  CleanPrediction out;
  out.n = g.n;
  out.px1.resize(g.n);
  out.px2.resize(g.n);
  out.pe.assign(static_cast<std::size_t>(g.n) * g.n, 0.0);
  for (int i = 0; i < g.n; ++i) {
    const double* hi = hL.data() + static_cast<std::size_t>(i) * H;
    double z1 = heads.b1, z2 = heads.b2;
    for (int r = 0; r < H; ++r) {
      z1 += heads.w1[r] * hi[r];
      z2 += heads.w2[r] * hi[r];
    }
    out.px1[i] = clamp_prob(logistic(z1));
    out.px2[i] = clamp_prob(logistic(z2));
  }
  for (int i = 0; i < g.n; ++i) {
    const double* hi = hL.data() + static_cast<std::size_t>(i) * H;
    for (int j = i + 1; j < g.n; ++j) {
      const double* hj = hL.data() + static_cast<std::size_t>(j) * H;
      double z = heads.be + heads.we[2 * H] * g.edge(i, j);
      for (int r = 0; r < H; ++r)
        z += heads.we[r] * (hi[r] * hj[r]) + heads.we[H + r] * (hi[r] + hj[r]);
      const double p = clamp_prob(logistic(z));
      out.pe[static_cast<std::size_t>(i) * g.n + j] = p;
      out.pe[static_cast<std::size_t>(j) * g.n + i] = p;
    }
  }
  return out;
}

inline double binary_cross_entropy(double p, int y) {
  const double pc = clamp_prob(p);
  return y ? -std::log(pc) : -std::log(1.0 - pc);
}

// Algorithm loss: per-bit cross-entropy over both condition vectors plus
// lambda times the per-unordered-pair edge cross-entropy.
inline double loss(const CleanPrediction& pred, const CondGraph& clean, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (pred.n != clean.n || pred.px1.size() != clean.x1.size() ||
      pred.px2.size() != clean.x2.size() ||
      pred.pe.size() != clean.adj.size())
    throw std::invalid_argument("prediction shape does not match clean graph");
  double total = 0.0;
  for (int i = 0; i < clean.n; ++i) {
    total += binary_cross_entropy(pred.px1[i], clean.x1[i]);
    total += binary_cross_entropy(pred.px2[i], clean.x2[i]);
  }
  for (int i = 0; i < clean.n; ++i)
    for (int j = i + 1; j < clean.n; ++j)
      total += lambda * binary_cross_entropy(pred.edge(i, j), clean.edge(i, j));
  return total;
}

namespace detail {

// Forward plus exact reverse-mode gradient of the loss. Returns the loss and
// accumulates into grad (size of model.params). Clamped outputs contribute
// zero gradient, matching the clamped loss exactly.
inline double accumulate_loss_grad(const DenoiserModel& model, const FeatureTensor& feats,
                                   const NoisyGraph& noisy, const CondGraph& clean,
                                   double lambda, std::vector<double>& grad) {
  const CondGraph& g = noisy.graph;
  if (feats.n != g.n || clean.n != g.n)
    throw std::invalid_argument("feature/clean shape does not match noisy graph");
  if (grad.size() != model.params.size())
    throw std::invalid_argument("gradient buffer has wrong size");
  const int H = model.hyper.hidden;
  const TrunkConfig tc = trunk_config(model.hyper);
  const std::vector<double> inputs = assemble_node_inputs(feats);
  TrunkTrace trace;
  trunk_forward(model.params, tc, g, inputs, trace);
  const std::vector<double>& hL = trace.h[tc.rounds];
  const DenoiserHeads heads = head_view(model);

  const std::size_t head_base = trunk_param_count(tc);
  double* g_w1 = grad.data() + head_base;
  double* g_b1 = g_w1 + H;
  double* g_w2 = g_b1 + 1;
  double* g_b2 = g_w2 + H;
  double* g_we = g_b2 + 1;
  double* g_be = g_we + 2 * H + 1;

  std::vector<double> d_hL(static_cast<std::size_t>(g.n) * H, 0.0);
  double total = 0.0;

  for (int i = 0; i < g.n; ++i) {
    const double* hi = hL.data() + static_cast<std::size_t>(i) * H;
    double* di = d_hL.data() + static_cast<std::size_t>(i) * H;
    double z1 = heads.b1, z2 = heads.b2;
    for (int r = 0; r < H; ++r) {
      z1 += heads.w1[r] * hi[r];
      z2 += heads.w2[r] * hi[r];
    }
    const double p1 = logistic(z1), p2 = logistic(z2);
    total += binary_cross_entropy(p1, clean.x1[i]);
    total += binary_cross_entropy(p2, clean.x2[i]);
    const bool c1 = p1 < kProbClamp || p1 > 1.0 - kProbClamp;
    const bool c2 = p2 < kProbClamp || p2 > 1.0 - kProbClamp;
    const double dz1 = c1 ? 0.0 : p1 - clean.x1[i];
    const double dz2 = c2 ? 0.0 : p2 - clean.x2[i];
    for (int r = 0; r < H; ++r) {
      g_w1[r] += dz1 * hi[r];
      g_w2[r] += dz2 * hi[r];
      di[r] += dz1 * heads.w1[r] + dz2 * heads.w2[r];
    }
    *g_b1 += dz1;
    *g_b2 += dz2;
  }

  for (int i = 0; i < g.n; ++i) {
    const double* hi = hL.data() + static_cast<std::size_t>(i) * H;
    double* di = d_hL.data() + static_cast<std::size_t>(i) * H;
    for (int j = i + 1; j < g.n; ++j) {
      const double* hj = hL.data() + static_cast<std::size_t>(j) * H;
      double* dj = d_hL.data() + static_cast<std::size_t>(j) * H;
      const int bit = g.edge(i, j);
      double z = heads.be + heads.we[2 * H] * bit;
      for (int r = 0; r < H; ++r)
        z += heads.we[r] * (hi[r] * hj[r]) + heads.we[H + r] * (hi[r] + hj[r]);
      const double p = logistic(z);
      total += lambda * binary_cross_entropy(p, clean.edge(i, j));
      const bool clamped = p < kProbClamp || p > 1.0 - kProbClamp;
      const double dz = clamped ? 0.0 : lambda * (p - clean.edge(i, j));
      if (dz == 0.0) continue;
      for (int r = 0; r < H; ++r) {
        g_we[r] += dz * hi[r] * hj[r];
        g_we[H + r] += dz * (hi[r] + hj[r]);
        di[r] += dz * (heads.we[r] * hj[r] + heads.we[H + r]);
        dj[r] += dz * (heads.we[r] * hi[r] + heads.we[H + r]);
      }
      g_we[2 * H] += dz * bit;
      *g_be += dz;
    }
  }

  trunk_backward(model.params, tc, g, inputs, trace, d_hL, grad.data());
  return total;
}

}  // namespace detail

// Exact gradient of loss(predict(model, feats, noisy), clean, lambda) with
// respect to every model parameter.
inline std::vector<double> grad(const DenoiserModel& model, const FeatureTensor& feats,
                                const NoisyGraph& noisy, const CondGraph& clean, double lambda) {
  std::vector<double> g(model.params.size(), 0.0);
  detail::accumulate_loss_grad(model, feats, noisy, clean, lambda, g);
  return g;
}

struct TrainConfig {
  AdamParams adam;
  int batch = 8;
  int steps = 3000;
  double lambda = 1.0;
  std::uint64_t seed = 1;
};

struct TrainResult {
  DenoiserModel model;
  std::vector<double> loss_trace;  // mean per-example loss per step
};

// Algorithm: sample graph, sample t uniformly, corrupt, predict, step the
// optimizer on the summed batch gradient. Fully deterministic given the seed.
inline TrainResult train(const std::vector<CondGraph>& corpus, const NoiseSchedule& schedule,
                         const DenoiserHyper& hyper, const TrainConfig& cfg) {
  if (corpus.empty()) throw std::invalid_argument("training corpus is empty");
  TrainResult out;
  out.model = init_denoiser(hyper, derive_seed(cfg.seed, 0));
  Rng rng(derive_seed(cfg.seed, 1));
  Adam opt(out.model.params.size(), cfg.adam);
  std::vector<double> grad_sum(out.model.params.size());
  out.loss_trace.reserve(cfg.steps);
  for (int step = 0; step < cfg.steps; ++step) {
    std::fill(grad_sum.begin(), grad_sum.end(), 0.0);
    double batch_loss = 0.0;
    for (int b = 0; b < cfg.batch; ++b) {
      const CondGraph& g = corpus[rng.next_below(corpus.size())];
      const int t = rng.next_int(1, schedule.T);
      const NoisyGraph noisy = corrupt(g, schedule, t, rng.next_u64());
      const FeatureTensor feats = extract_features(noisy, schedule.T);
      batch_loss +=
          detail::accumulate_loss_grad(out.model, feats, noisy, g, cfg.lambda, grad_sum);
    }
    out.loss_trace.push_back(batch_loss / cfg.batch);
    opt.step(out.model.params, grad_sum);
  }
  return out;
}

}  // namespace cdgraph
