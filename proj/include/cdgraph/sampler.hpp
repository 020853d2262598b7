#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "cdgraph/denoiser.hpp"
#include "cdgraph/forward.hpp"
#include "cdgraph/graph.hpp"
#include "cdgraph/guidance.hpp"
#include "cdgraph/rng.hpp"
#include "cdgraph/schedule.hpp"

namespace cdgraph {

// The reverse process is written against this callable so that the trained
// network and test oracles (exact Bayes posteriors) are interchangeable.
using DenoiserFn = std::function<CleanPrediction(const NoisyGraph&)>;

inline DenoiserFn make_denoiser_fn(const DenoiserModel& model, int total_steps) {
  return [model, total_steps](const NoisyGraph& noisy) {
    return predict(model, extract_features(noisy, total_steps), noisy);
  };
}

// Contagion-based node factor: mixes the exact single-variable posterior over
// the denoiser's clean-bit probability. Reads only the requested condition's
// bits, never the other condition.
inline std::vector<double> reverse_node_step(const CleanPrediction& pred,
                                             const NoiseSchedule& schedule,
                                             const NoisyGraph& noisy, int condition_index) {
  if (noisy.t < 2 || noisy.t > schedule.T)
    throw std::out_of_range("reverse_node_step requires 2 <= t <= T");
  const std::vector<std::uint8_t>& x = noisy.graph.cond(condition_index);
  const std::vector<double>& phat = condition_index == 1 ? pred.px1 : pred.px2;
  if (phat.size() != x.size()) throw std::invalid_argument("prediction does not match graph");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double p1 = posterior_flip(schedule, noisy.t, x[i], 1);
    const double p0 = posterior_flip(schedule, noisy.t, x[i], 0);
    out[i] = p1 * phat[i] + p0 * (1.0 - phat[i]);
  }
  return out;
}

// Homophily-based edge factor, same mixture per unordered pair.
inline std::vector<double> reverse_edge_step(const CleanPrediction& pred,
                                             const NoiseSchedule& schedule,
                                             const NoisyGraph& noisy) {
  if (noisy.t < 2 || noisy.t > schedule.T)
    throw std::out_of_range("reverse_edge_step requires 2 <= t <= T");
  const CondGraph& g = noisy.graph;
  if (pred.n != g.n) throw std::invalid_argument("prediction does not match graph");
  std::vector<double> out(static_cast<std::size_t>(g.n) * g.n, 0.0);
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j) {
      const int bit = g.edge(i, j);
      const double phat = pred.edge(i, j);
      const double p1 = posterior_flip(schedule, noisy.t, bit, 1);
      const double p0 = posterior_flip(schedule, noisy.t, bit, 0);
      const double p = p1 * phat + p0 * (1.0 - phat);
      out[static_cast<std::size_t>(i) * g.n + j] = p;
      out[static_cast<std::size_t>(j) * g.n + i] = p;
    }
  return out;
}

// Final step: sample the clean graph directly from the predicted
// probabilities. Draw order is x1 nodes, x2 nodes, pairs lexicographic.
inline CondGraph reconstruction_step(const CleanPrediction& pred, const NoisyGraph& noisy,
                                     Rng& rng) {
  if (noisy.t != 1) throw std::invalid_argument("reconstruction_step requires t = 1");
  const int n = noisy.graph.n;
  if (pred.n != n) throw std::invalid_argument("prediction does not match graph");
  CondGraph out(n);
  for (int i = 0; i < n; ++i) out.x1[i] = rng.bernoulli(pred.px1[i]) ? 1 : 0;
  for (int i = 0; i < n; ++i) out.x2[i] = rng.bernoulli(pred.px2[i]) ? 1 : 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(pred.edge(i, j))) out.set_edge(i, j, 1);
  return out;
}

struct SampleRun {
  std::uint64_t seed = 0;
  int num_graphs = 1;
  std::vector<int> node_counts;
  bool trace_enabled = false;
};

// Node counts are drawn uniformly from the empirical multiset of training
// corpus sizes; chain k then uses the derived stream (seed, k).
inline SampleRun make_run(std::uint64_t seed, int num_graphs,
                          const std::vector<int>& training_sizes, bool trace_enabled = false) {
  if (num_graphs < 1) throw std::invalid_argument("num_graphs must be at least 1");
  if (training_sizes.empty()) throw std::invalid_argument("empty training size distribution");
  SampleRun run;
  run.seed = seed;
  run.num_graphs = num_graphs;
  run.trace_enabled = trace_enabled;
  Rng rng(mix64(seed));
  run.node_counts.resize(num_graphs);
  for (int k = 0; k < num_graphs; ++k)
    run.node_counts[k] = training_sizes[rng.next_below(training_sizes.size())];
  return run;
}

struct GuidanceSettings {
  double gamma = 1.0;
  bool hard_gate = false;
  bool guide_reconstruction = true;
};

struct SampleResult {
  std::vector<CondGraph> graphs;
  std::vector<std::vector<NoisyGraph>> traces;  // one snapshot per step when enabled
};

namespace detail {

struct GuidanceContext {
  const GuidanceClassifiers* classifiers = nullptr;
  GuidanceSettings settings;
};

// One reverse chain. Every variable consumes exactly one RNG draw per step in
// fixed order (x1 nodes, x2 nodes, pairs lexicographic); guidance consumes
// none, so gamma = 0 reproduces the unconditional chain bit for bit.
inline CondGraph run_chain(const DenoiserFn& denoiser, const NoiseSchedule& schedule, int n,
                           Rng& rng, const GuidanceContext* guide,
                           std::vector<NoisyGraph>* trace) {
  NoisyGraph state{CondGraph(n), schedule.T};
  for (int i = 0; i < n; ++i) state.graph.x1[i] = rng.bernoulli(0.5) ? 1 : 0;
  for (int i = 0; i < n; ++i) state.graph.x2[i] = rng.bernoulli(0.5) ? 1 : 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(0.5)) state.graph.set_edge(i, j, 1);
  if (trace) trace->push_back(state);

  const bool guiding = guide && guide->settings.gamma != 0.0;
  for (int t = schedule.T; t >= 2; --t) {
    state.t = t;
    const CleanPrediction pred = denoiser(state);
    std::vector<double> pn1 = reverse_node_step(pred, schedule, state, 1);
    std::vector<double> pn2 = reverse_node_step(pred, schedule, state, 2);
    std::vector<double> pe = reverse_edge_step(pred, schedule, state);
    if (guiding) {
      const VariableRatios ratios = classifier_ratios(*guide->classifiers, state, schedule.T,
                                                      guide->settings.hard_gate);
      const double gamma = guide->settings.gamma;
      for (int i = 0; i < n; ++i) {
        pn1[i] = guide_bernoulli(pn1[i], ratios.node1[i], gamma);
        pn2[i] = guide_bernoulli(pn2[i], ratios.node2[i], gamma);
      }
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          const double p = guide_bernoulli(pe[static_cast<std::size_t>(i) * n + j],
                                           ratios.edge_ratio(i, j), gamma);
          pe[static_cast<std::size_t>(i) * n + j] = p;
          pe[static_cast<std::size_t>(j) * n + i] = p;
        }
    }
    CondGraph next(n);
    for (int i = 0; i < n; ++i) next.x1[i] = rng.bernoulli(pn1[i]) ? 1 : 0;
    for (int i = 0; i < n; ++i) next.x2[i] = rng.bernoulli(pn2[i]) ? 1 : 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.bernoulli(pe[static_cast<std::size_t>(i) * n + j])) next.set_edge(i, j, 1);
    state.graph = std::move(next);
    state.t = t - 1;
    if (trace) trace->push_back(state);
  }

  state.t = 1;
  CleanPrediction pred = denoiser(state);
  if (guiding && guide->settings.guide_reconstruction) {
    const VariableRatios ratios =
        classifier_ratios(*guide->classifiers, state, schedule.T, guide->settings.hard_gate);
    const double gamma = guide->settings.gamma;
    for (int i = 0; i < n; ++i) {
      pred.px1[i] = guide_bernoulli(pred.px1[i], ratios.node1[i], gamma);
      pred.px2[i] = guide_bernoulli(pred.px2[i], ratios.node2[i], gamma);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double p =
            guide_bernoulli(pred.edge(i, j), ratios.edge_ratio(i, j), gamma);
        pred.pe[static_cast<std::size_t>(i) * n + j] = p;
        pred.pe[static_cast<std::size_t>(j) * n + i] = p;
      }
  }
  return reconstruction_step(pred, state, rng);
}

inline SampleResult run_chains(const DenoiserFn& denoiser, const NoiseSchedule& schedule,
                               const SampleRun& run, const GuidanceContext* guide) {
  SampleResult out;
  out.graphs.reserve(run.num_graphs);
  if (run.trace_enabled) out.traces.resize(run.num_graphs);
  for (int k = 0; k < run.num_graphs; ++k) {
    Rng rng(derive_seed(run.seed, static_cast<std::uint64_t>(k)));
    std::vector<NoisyGraph>* trace = run.trace_enabled ? &out.traces[k] : nullptr;
    out.graphs.push_back(run_chain(denoiser, schedule, run.node_counts[k], rng, guide, trace));
  }
  return out;
}

}  // namespace detail

inline SampleResult sample_unconditional(const DenoiserFn& denoiser,
                                         const NoiseSchedule& schedule, const SampleRun& run) {
  return detail::run_chains(denoiser, schedule, run, nullptr);
}

inline SampleResult sample_conditional(const DenoiserFn& denoiser,
                                       const GuidanceClassifiers& classifiers,
                                       const NoiseSchedule& schedule, const SampleRun& run,
                                       const GuidanceSettings& settings) {
  detail::GuidanceContext ctx{&classifiers, settings};
  return detail::run_chains(denoiser, schedule, run, &ctx);
}

}  // namespace cdgraph
