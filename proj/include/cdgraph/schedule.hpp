#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdgraph {

// 2x2 symmetric doubly stochastic kernel [[1-flip, flip], [flip, 1-flip]].
struct TransitionKernel {
  double flip = 0.0;

  // q(x_to | x_from) for one application of the kernel
  double prob(int x_to, int x_from) const { return x_to == x_from ? 1.0 - flip : flip; }
};

enum class ScheduleShape { linear, cosine };

inline ScheduleShape schedule_shape_from_string(const std::string& s) {
  if (s == "linear") return ScheduleShape::linear;
  if (s == "cosine") return ScheduleShape::cosine;
  throw std::invalid_argument("unknown schedule shape: " + s);
}

// Per-step flip parameters beta_t together with the precomputed cumulative
// corruption parameters. Steps are 1-indexed: beta[t-1] belongs to step t.
// The per-step flip probability is beta_t / 2, so the cumulative flip is
// (1 - prod_{s<=t} (1 - beta_s)) / 2, strictly increasing and below 1/2.
struct NoiseSchedule {
  int T = 0;
  std::vector<double> beta;
  std::vector<double> cum_flip;

  double beta_at(int t) const { return beta[static_cast<std::size_t>(t) - 1]; }
  double cum_at(int t) const { return cum_flip[static_cast<std::size_t>(t) - 1]; }
};

inline NoiseSchedule make_schedule(std::vector<double> beta) {
  if (beta.empty()) throw std::invalid_argument("schedule needs at least one step");
  NoiseSchedule s;
  s.T = static_cast<int>(beta.size());
  s.beta = std::move(beta);
  s.cum_flip.resize(s.beta.size());
  // recursion c_t = f_t + (1 - 2 f_t) c_{t-1} with f_t = beta_t / 2, equal to
  // the closed form (1 - prod(1 - 2 f_s)) / 2 but exact at t = 1
  double c = 0.0;
  for (std::size_t i = 0; i < s.beta.size(); ++i) {
    const double b = s.beta[i];
    if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("beta_t must lie in (0,1)");
    const double f = b / 2.0;
    c = f + (1.0 - 2.0 * f) * c;
    s.cum_flip[i] = c;
  }
  return s;
}

inline NoiseSchedule make_schedule(int T, double beta_min, double beta_max, ScheduleShape shape) {
  if (T < 1) throw std::invalid_argument("schedule needs T >= 1");
  if (beta_min > beta_max) throw std::invalid_argument("beta_min must not exceed beta_max");
  std::vector<double> beta(T);
  for (int t = 1; t <= T; ++t) {
    const double u = T > 1 ? static_cast<double>(t - 1) / (T - 1) : 0.0;
    const double ramp = shape == ScheduleShape::linear ? u : (1.0 - std::cos(M_PI * u)) / 2.0;
    beta[t - 1] = beta_min + (beta_max - beta_min) * ramp;
  }
  return make_schedule(std::move(beta));
}

inline void check_step(const NoiseSchedule& s, int t) {
  if (t < 1 || t > s.T) throw std::out_of_range("step index out of range");
}

// Single application of step t: flip probability beta_t / 2.
inline TransitionKernel step_kernel(const NoiseSchedule& s, int t) {
  check_step(s, t);
  return {s.beta_at(t) / 2.0};
}

// Composition of step kernels 1..t.
inline TransitionKernel cumulative_kernel(const NoiseSchedule& s, int t) {
  check_step(s, t);
  return {s.cum_at(t)};
}

inline void check_bit(int b) {
  if (b != 0 && b != 1) throw std::invalid_argument("bit values must be 0 or 1");
}

// Exact single-variable posterior P(x_{t-1} = 1 | x_t, x_0) of the forward
// chain, combining the step kernel at t with the cumulative kernel at t-1.
// t = 1 is rejected; the reconstruction term handles it.
inline double posterior_flip(const NoiseSchedule& s, int t, int x_t, int x_0) {
  if (t < 2 || t > s.T) throw std::out_of_range("posterior_flip requires 2 <= t <= T");
  check_bit(x_t);
  check_bit(x_0);
  const TransitionKernel step = step_kernel(s, t);
  const TransitionKernel cum = cumulative_kernel(s, t - 1);
  const double w1 = step.prob(x_t, 1) * cum.prob(1, x_0);
  const double w0 = step.prob(x_t, 0) * cum.prob(0, x_0);
  return w1 / (w1 + w0);
}

}  // namespace cdgraph
