#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "cdgraph/graph.hpp"
#include "cdgraph/rng.hpp"

namespace cdgraph {

constexpr double kProbClamp = 1e-7;

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double clamp_prob(double p) {
  if (p < kProbClamp) return kProbClamp;
  if (p > 1.0 - kProbClamp) return 1.0 - kProbClamp;
  return p;
}

// Message-passing trunk shared by the denoiser and the guidance classifiers:
// an input projection followed by `rounds` steps of sum aggregation over the
// graph's edges, ReLU throughout. Parameters live in one flat vector.
//
// Layout: W_in (hidden x in_dim), b_in, then per round W_self (hidden x
// hidden), W_nbr (hidden x hidden), b.
struct TrunkConfig {
  int rounds = 2;
  int hidden = 32;
  int in_dim = 9;
};

inline std::size_t trunk_param_count(const TrunkConfig& c) {
  return static_cast<std::size_t>(c.hidden) * c.in_dim + c.hidden +
         static_cast<std::size_t>(c.rounds) *
             (2 * static_cast<std::size_t>(c.hidden) * c.hidden + c.hidden);
}

// Cached activations for the backward pass. h[0] is the post-ReLU input
// embedding, h[l] the post-ReLU state after round l; msg[l-1] the aggregated
// neighbor sums feeding round l.
struct TrunkTrace {
  std::vector<std::vector<double>> h;
  std::vector<std::vector<double>> msg;
};

inline void trunk_forward(std::span<const double> params, const TrunkConfig& cfg,
                          const CondGraph& g, const std::vector<double>& node_inputs,
                          TrunkTrace& trace) {
  const int n = g.n;
  const int H = cfg.hidden;
  const int D = cfg.in_dim;
  if (node_inputs.size() != static_cast<std::size_t>(n) * D)
    throw std::invalid_argument("node input size does not match trunk config");
  trace.h.assign(cfg.rounds + 1, std::vector<double>(static_cast<std::size_t>(n) * H, 0.0));
  trace.msg.assign(cfg.rounds, std::vector<double>(static_cast<std::size_t>(n) * H, 0.0));

  const double* w_in = params.data();
  const double* b_in = w_in + static_cast<std::size_t>(H) * D;
  for (int i = 0; i < n; ++i) {
    const double* v = node_inputs.data() + static_cast<std::size_t>(i) * D;
    double* h0 = trace.h[0].data() + static_cast<std::size_t>(i) * H;
    for (int r = 0; r < H; ++r) {
      double a = b_in[r];
      const double* wrow = w_in + static_cast<std::size_t>(r) * D;
      for (int c = 0; c < D; ++c) a += wrow[c] * v[c];
      h0[r] = a > 0.0 ? a : 0.0;
    }
  }

  const double* layer = b_in + H;
  for (int l = 0; l < cfg.rounds; ++l) {
    const double* w_self = layer;
    const double* w_nbr = w_self + static_cast<std::size_t>(H) * H;
    const double* b = w_nbr + static_cast<std::size_t>(H) * H;
    layer = b + H;
    const std::vector<double>& prev = trace.h[l];
    std::vector<double>& msg = trace.msg[l];
    for (int i = 0; i < n; ++i) {
      double* m = msg.data() + static_cast<std::size_t>(i) * H;
      for (int j = 0; j < n; ++j) {
        if (!g.edge(i, j)) continue;
        const double* hj = prev.data() + static_cast<std::size_t>(j) * H;
        for (int r = 0; r < H; ++r) m[r] += hj[r];
      }
    }
    std::vector<double>& cur = trace.h[l + 1];
    for (int i = 0; i < n; ++i) {
      const double* hp = prev.data() + static_cast<std::size_t>(i) * H;
      const double* m = msg.data() + static_cast<std::size_t>(i) * H;
      double* hc = cur.data() + static_cast<std::size_t>(i) * H;
      for (int r = 0; r < H; ++r) {
        double a = b[r];
        const double* ws = w_self + static_cast<std::size_t>(r) * H;
        const double* wn = w_nbr + static_cast<std::size_t>(r) * H;
        for (int c = 0; c < H; ++c) a += ws[c] * hp[c] + wn[c] * m[c];
        hc[r] = a > 0.0 ? a : 0.0;
      }
    }
  }
}

// Backpropagate d_hL (gradient wrt the final embeddings) through the trunk,
// accumulating parameter gradients into grad (same layout as params).
// d_hL is consumed.
inline void trunk_backward(std::span<const double> params, const TrunkConfig& cfg,
                           const CondGraph& g, const std::vector<double>& node_inputs,
                           const TrunkTrace& trace, std::vector<double>& d_hL, double* grad) {
  const int n = g.n;
  const int H = cfg.hidden;
  const int D = cfg.in_dim;
  std::vector<double> d_cur = std::move(d_hL);
  std::vector<double> d_prev(static_cast<std::size_t>(n) * H);
  std::vector<double> da(static_cast<std::size_t>(n) * H);

  for (int l = cfg.rounds - 1; l >= 0; --l) {
    const std::size_t base = static_cast<std::size_t>(H) * D + H +
                             static_cast<std::size_t>(l) * (2 * static_cast<std::size_t>(H) * H + H);
    const double* w_self = params.data() + base;
    const double* w_nbr = w_self + static_cast<std::size_t>(H) * H;
    double* g_self = grad + base;
    double* g_nbr = g_self + static_cast<std::size_t>(H) * H;
    double* g_b = g_nbr + static_cast<std::size_t>(H) * H;

    const std::vector<double>& hout = trace.h[l + 1];
    const std::vector<double>& hprev = trace.h[l];
    const std::vector<double>& msg = trace.msg[l];

    for (std::size_t k = 0; k < da.size(); ++k) da[k] = hout[k] > 0.0 ? d_cur[k] : 0.0;

    for (int i = 0; i < n; ++i) {
      const double* dai = da.data() + static_cast<std::size_t>(i) * H;
      const double* hp = hprev.data() + static_cast<std::size_t>(i) * H;
      const double* m = msg.data() + static_cast<std::size_t>(i) * H;
      for (int r = 0; r < H; ++r) {
        const double d = dai[r];
        if (d == 0.0) continue;
        double* gs = g_self + static_cast<std::size_t>(r) * H;
        double* gn = g_nbr + static_cast<std::size_t>(r) * H;
        for (int c = 0; c < H; ++c) {
          gs[c] += d * hp[c];
          gn[c] += d * m[c];
        }
        g_b[r] += d;
      }
    }

    std::fill(d_prev.begin(), d_prev.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      const double* dai = da.data() + static_cast<std::size_t>(i) * H;
      double* dpi = d_prev.data() + static_cast<std::size_t>(i) * H;
      // through the self path
      for (int r = 0; r < H; ++r) {
        const double d = dai[r];
        if (d == 0.0) continue;
        const double* ws = w_self + static_cast<std::size_t>(r) * H;
        for (int c = 0; c < H; ++c) dpi[c] += d * ws[c];
      }
      // through the neighbor sums: h_{l,i} feeds msg of every neighbor j
      for (int j = 0; j < n; ++j) {
        if (!g.edge(i, j)) continue;
        const double* daj = da.data() + static_cast<std::size_t>(j) * H;
        for (int r = 0; r < H; ++r) {
          const double d = daj[r];
          if (d == 0.0) continue;
          const double* wn = w_nbr + static_cast<std::size_t>(r) * H;
          for (int c = 0; c < H; ++c) dpi[c] += d * wn[c];
        }
      }
    }
    std::swap(d_cur, d_prev);
  }

  // input projection
  const double* w_in = params.data();
  double* g_win = grad;
  double* g_bin = grad + static_cast<std::size_t>(H) * D;
  const std::vector<double>& h0 = trace.h[0];
  for (int i = 0; i < n; ++i) {
    const double* d0 = d_cur.data() + static_cast<std::size_t>(i) * H;
    const double* h0i = h0.data() + static_cast<std::size_t>(i) * H;
    const double* v = node_inputs.data() + static_cast<std::size_t>(i) * D;
    for (int r = 0; r < H; ++r) {
      const double d = h0i[r] > 0.0 ? d0[r] : 0.0;
      if (d == 0.0) continue;
      double* gw = g_win + static_cast<std::size_t>(r) * D;
      for (int c = 0; c < D; ++c) gw[c] += d * v[c];
      g_bin[r] += d;
    }
  }
  (void)w_in;
}

// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)], applied per layer.
inline void init_trunk_params(std::vector<double>& params, const TrunkConfig& cfg, Rng& rng) {
  const std::size_t in_count = static_cast<std::size_t>(cfg.hidden) * cfg.in_dim + cfg.hidden;
  const double s_in = 1.0 / std::sqrt(static_cast<double>(cfg.in_dim));
  for (std::size_t k = 0; k < in_count; ++k) params[k] = (2.0 * rng.next_double() - 1.0) * s_in;
  const double s_h = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
  const std::size_t total = trunk_param_count(cfg);
  for (std::size_t k = in_count; k < total; ++k) params[k] = (2.0 * rng.next_double() - 1.0) * s_h;
}

// Adaptive moment estimation with bias correction.
struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct Adam {
  AdamParams hp;
  std::vector<double> m, v;
  long steps = 0;

  explicit Adam(std::size_t dim, AdamParams params = {}) : hp(params), m(dim, 0.0), v(dim, 0.0) {}

  void step(std::vector<double>& theta, const std::vector<double>& grad) {
    if (theta.size() != m.size() || grad.size() != m.size())
      throw std::invalid_argument("optimizer dimension mismatch");
    ++steps;
    const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(steps));
    const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(steps));
    for (std::size_t k = 0; k < theta.size(); ++k) {
      m[k] = hp.beta1 * m[k] + (1.0 - hp.beta1) * grad[k];
      v[k] = hp.beta2 * v[k] + (1.0 - hp.beta2) * grad[k] * grad[k];
      theta[k] -= hp.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + hp.eps);
    }
  }
};

}  // namespace cdgraph
