#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "cdgraph/denoiser.hpp"
#include "cdgraph/forward.hpp"
#include "cdgraph/graph.hpp"
#include "cdgraph/guidance.hpp"
#include "cdgraph/rng.hpp"
#include "cdgraph/sampler.hpp"
#include "cdgraph/schedule.hpp"

using namespace cdgraph;

namespace {

CleanPrediction constant_prediction(int n, double px, double pe_val) {
  CleanPrediction pred;
  pred.n = n;
  pred.px1.assign(n, px);
  pred.px2.assign(n, px);
  pred.pe.assign(static_cast<std::size_t>(n) * n, pe_val);
  for (int i = 0; i < n; ++i) pred.pe[static_cast<std::size_t>(i) * n + i] = 0.0;
  return pred;
}

ClassifierModel zero_classifier(const DenoiserHyper& hyper, const std::string& role, int cond) {
  ClassifierModel m;
  m.hyper = hyper;
  m.role = role;
  m.target_condition = cond;
  m.params.assign(classifier_param_count(hyper), 0.0);
  return m;
}

// independent oracle for one variable: enumerate the forward chain
// x0 -> x_{t-1} -> x_t with kernel probabilities, then mix with phat
double enumerate_reverse(const NoiseSchedule& s, int t, int x_t, double phat) {
  double mix = 0.0;
  for (int x0 = 0; x0 <= 1; ++x0) {
    double w[2];
    for (int mid = 0; mid <= 1; ++mid)
      w[mid] = cumulative_kernel(s, t - 1).prob(mid, x0) * step_kernel(s, t).prob(x_t, mid);
    const double posterior1 = w[1] / (w[0] + w[1]);
    mix += (x0 == 1 ? phat : 1.0 - phat) * posterior1;
  }
  return mix;
}

}  // namespace

TEST_CASE("point-mass clean predictions reduce to the exact posterior") {
  const NoiseSchedule s = make_schedule(10, 0.05, 0.5, ScheduleShape::linear);
  CondGraph g(3);
  g.x1 = {1, 0, 1};
  const NoisyGraph noisy{g, 5};
  const std::vector<double> out =
      reverse_node_step(constant_prediction(3, 1.0, 0.5), s, noisy, 1);
  for (int i = 0; i < 3; ++i)
    REQUIRE(out[i] == Catch::Approx(posterior_flip(s, 5, g.x1[i], 1)).margin(1e-15));
}

TEST_CASE("uniform clean predictions average the two posteriors") {
  const NoiseSchedule s = make_schedule(10, 0.05, 0.5, ScheduleShape::linear);
  CondGraph g(2);
  g.x2 = {1, 0};
  const NoisyGraph noisy{g, 4};
  const std::vector<double> out =
      reverse_node_step(constant_prediction(2, 0.5, 0.5), s, noisy, 2);
  for (int i = 0; i < 2; ++i) {
    const double expect =
        0.5 * (posterior_flip(s, 4, g.x2[i], 1) + posterior_flip(s, 4, g.x2[i], 0));
    REQUIRE(out[i] == Catch::Approx(expect).margin(1e-15));
  }
}

TEST_CASE("reverse node step matches the enumeration oracle") {
  const NoiseSchedule s = make_schedule(8, 0.1, 0.6, ScheduleShape::linear);
  CondGraph g(2);
  g.x1 = {1, 0};
  const NoisyGraph noisy{g, 3};
  CleanPrediction pred = constant_prediction(2, 0.5, 0.5);
  pred.px1 = {0.83, 0.21};
  const std::vector<double> out = reverse_node_step(pred, s, noisy, 1);
  REQUIRE(out[0] == Catch::Approx(enumerate_reverse(s, 3, 1, 0.83)).margin(1e-14));
  REQUIRE(out[1] == Catch::Approx(enumerate_reverse(s, 3, 0, 0.21)).margin(1e-14));
}

TEST_CASE("reverse node step for one condition never reads the other") {
  const NoiseSchedule s = make_schedule(10, 0.05, 0.5, ScheduleShape::linear);
  CondGraph g(4);
  g.x1 = {1, 0, 1, 0};
  g.x2 = {1, 1, 0, 0};
  const CleanPrediction pred = constant_prediction(4, 0.37, 0.5);
  NoisyGraph noisy{g, 6};
  const std::vector<double> base = reverse_node_step(pred, s, noisy, 1);
  noisy.graph.x2 = {0, 0, 1, 1};
  for (int i = 0; i < 4; ++i) noisy.graph.set_edge(i, (i + 1) % 4, 1);
  const std::vector<double> perturbed = reverse_node_step(pred, s, noisy, 1);
  REQUIRE(base == perturbed);
}

TEST_CASE("reverse edge step matches a brute-force enumeration over edge states") {
  const NoiseSchedule s = make_schedule(8, 0.1, 0.6, ScheduleShape::linear);
  CondGraph g(3);
  g.set_edge(0, 1, 1);
  const NoisyGraph noisy{g, 4};
  CleanPrediction pred = constant_prediction(3, 0.5, 0.5);
  const double phat01 = 0.9, phat02 = 0.3, phat12 = 0.6;
  pred.pe[0 * 3 + 1] = pred.pe[1 * 3 + 0] = phat01;
  pred.pe[0 * 3 + 2] = pred.pe[2 * 3 + 0] = phat02;
  pred.pe[1 * 3 + 2] = pred.pe[2 * 3 + 1] = phat12;
  const std::vector<double> out = reverse_edge_step(pred, s, noisy);

  // enumerate the 2^3 joint of clean edge states; pairs are independent, so
  // the marginal per pair must match the full-joint computation
  const std::array<double, 3> phat = {phat01, phat02, phat12};
  const std::array<std::pair<int, int>, 3> pairs = {{{0, 1}, {0, 2}, {1, 2}}};
  std::array<double, 3> marginal{};
  for (int mask = 0; mask < 8; ++mask) {
    double weight = 1.0;
    for (int b = 0; b < 3; ++b) weight *= (mask >> b & 1) ? phat[b] : 1.0 - phat[b];
    for (int b = 0; b < 3; ++b) {
      const int e_t = g.edge(pairs[b].first, pairs[b].second);
      marginal[b] += weight * posterior_flip(s, 4, e_t, mask >> b & 1);
    }
  }
  for (int b = 0; b < 3; ++b)
    REQUIRE(out[pairs[b].first * 3 + pairs[b].second] ==
            Catch::Approx(marginal[b]).margin(1e-13));
}

TEST_CASE("reverse edge step output is exactly symmetric") {
  const NoiseSchedule s = make_schedule(10, 0.05, 0.5, ScheduleShape::linear);
  Rng rng(3);
  CondGraph g(5);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j)
      if (rng.bernoulli(0.5)) g.set_edge(i, j, 1);
  CleanPrediction pred = constant_prediction(5, 0.5, 0.5);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) {
      const double v = rng.next_double();
      pred.pe[i * 5 + j] = v;
      pred.pe[j * 5 + i] = v;
    }
  const std::vector<double> out = reverse_edge_step(pred, s, {g, 7});
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) REQUIRE(out[i * 5 + j] == out[j * 5 + i]);
}

TEST_CASE("reverse steps reject out-of-range steps") {
  const NoiseSchedule s = make_schedule(5, 0.05, 0.5, ScheduleShape::linear);
  const CleanPrediction pred = constant_prediction(2, 0.5, 0.5);
  REQUIRE_THROWS_AS(reverse_node_step(pred, s, {CondGraph(2), 1}, 1), std::out_of_range);
  REQUIRE_THROWS_AS(reverse_edge_step(pred, s, {CondGraph(2), 6}), std::out_of_range);
}

TEST_CASE("reconstruction reproduces the clean graph from confident predictions") {
  CondGraph target(4);
  target.x1 = {1, 0, 1, 1};
  target.x2 = {0, 0, 1, 0};
  target.set_edge(0, 2, 1);
  target.set_edge(1, 3, 1);
  CleanPrediction pred = constant_prediction(4, 0.0, 0.0);
  for (int i = 0; i < 4; ++i) {
    pred.px1[i] = target.x1[i] ? 1.0 - 1e-9 : 1e-9;
    pred.px2[i] = target.x2[i] ? 1.0 - 1e-9 : 1e-9;
    for (int j = 0; j < 4; ++j)
      if (i != j) pred.pe[i * 4 + j] = target.edge(i, j) ? 1.0 - 1e-9 : 1e-9;
  }
  Rng rng(5);
  for (int k = 0; k < 100; ++k)
    REQUIRE(reconstruction_step(pred, {CondGraph(4), 1}, rng) == target);
}

TEST_CASE("reconstruction is deterministic given the generator state") {
  const CleanPrediction pred = constant_prediction(5, 0.5, 0.5);
  Rng a(9), b(9);
  REQUIRE(reconstruction_step(pred, {CondGraph(5), 1}, a) ==
          reconstruction_step(pred, {CondGraph(5), 1}, b));
}

TEST_CASE("sampling runs draw node counts from the empirical distribution") {
  const std::vector<int> sizes = {2, 2, 3, 5};
  const SampleRun run = make_run(77, 10000, sizes);
  std::map<int, double> freq;
  for (int n : run.node_counts) freq[n] += 1.0 / run.node_counts.size();
  REQUIRE(freq[2] == Catch::Approx(0.5).margin(0.05));
  REQUIRE(freq[3] == Catch::Approx(0.25).margin(0.05));
  REQUIRE(freq[5] == Catch::Approx(0.25).margin(0.05));
  REQUIRE_THROWS_AS(make_run(1, 0, sizes), std::invalid_argument);
  REQUIRE_THROWS_AS(make_run(1, 5, {}), std::invalid_argument);
}

TEST_CASE("unconditional sampling is deterministic and structurally valid") {
  const NoiseSchedule s = make_schedule(6, 0.05, 0.5, ScheduleShape::linear);
  const DenoiserModel model = init_denoiser({1, 8}, 3);
  const DenoiserFn fn = make_denoiser_fn(model, s.T);
  SampleRun run = make_run(13, 5, {3, 4, 6}, true);
  const SampleResult a = sample_unconditional(fn, s, run);
  const SampleResult b = sample_unconditional(fn, s, run);
  REQUIRE(a.graphs == b.graphs);
  REQUIRE(a.graphs.size() == 5);
  for (std::size_t k = 0; k < a.graphs.size(); ++k) {
    REQUIRE_NOTHROW(validate(a.graphs[k]));
    REQUIRE(a.graphs[k].n == run.node_counts[k]);
    // every intermediate state satisfies the graph invariants at every t
    REQUIRE(a.traces[k].size() == static_cast<std::size_t>(s.T));
    for (const NoisyGraph& snap : a.traces[k]) {
      REQUIRE_NOTHROW(validate(snap.graph));
      REQUIRE(snap.graph.n == run.node_counts[k]);
    }
  }
}

TEST_CASE("a one-step schedule runs reconstruction only") {
  const NoiseSchedule s = make_schedule({0.3});
  int calls = 0;
  const DenoiserFn fn = [&calls](const NoisyGraph& g) {
    ++calls;
    REQUIRE(g.t == 1);
    return constant_prediction(g.graph.n, 0.9, 0.1);
  };
  const SampleResult r = sample_unconditional(fn, s, make_run(3, 4, {3}));
  REQUIRE(calls == 4);
  REQUIRE(r.graphs.size() == 4);
}

TEST_CASE("zero guidance strength reproduces unconditional samples bit for bit") {
  const NoiseSchedule s = make_schedule(6, 0.05, 0.5, ScheduleShape::linear);
  const DenoiserModel model = init_denoiser({1, 8}, 21);
  const DenoiserFn fn = make_denoiser_fn(model, s.T);
  GuidanceClassifiers classifiers;
  classifiers.outer = init_classifier({1, 8}, 4, "outer", 2);
  classifiers.inner = init_classifier({1, 8}, 5, "inner", 1);
  const SampleRun run = make_run(99, 6, {3, 5});
  const SampleResult plain = sample_unconditional(fn, s, run);
  GuidanceSettings settings;
  settings.gamma = 0.0;
  const SampleResult guided = sample_conditional(fn, classifiers, s, run, settings);
  REQUIRE(plain.graphs == guided.graphs);
}

TEST_CASE("constant classifiers leave conditional sampling unchanged") {
  const NoiseSchedule s = make_schedule(5, 0.05, 0.5, ScheduleShape::linear);
  const DenoiserModel model = init_denoiser({1, 8}, 11);
  const DenoiserFn fn = make_denoiser_fn(model, s.T);
  GuidanceClassifiers classifiers;
  classifiers.outer = zero_classifier({1, 8}, "outer", 2);
  classifiers.inner = zero_classifier({1, 8}, "inner", 1);
  const SampleRun run = make_run(7, 4, {4});
  const SampleResult plain = sample_unconditional(fn, s, run);
  GuidanceSettings settings;
  settings.gamma = 1.0;
  const SampleResult guided = sample_conditional(fn, classifiers, s, run, settings);
  REQUIRE(plain.graphs == guided.graphs);
}

TEST_CASE("guidance with an informative classifier shifts the samples") {
  // classifier that reads the mean condition-1 bit pushes node bits up
  const DenoiserHyper hyper{1, 2};
  const TrunkConfig tc = trunk_config(hyper);
  ClassifierModel outer = zero_classifier(hyper, "outer", 2);
  outer.params[0] = 1.0;
  outer.params[static_cast<std::size_t>(tc.hidden) * tc.in_dim + tc.hidden] = 1.0;
  outer.params[trunk_param_count(tc)] = 12.0;      // readout weight
  outer.params[trunk_param_count(tc) + 2] = -6.0;  // keeps the logistic responsive
  GuidanceClassifiers classifiers;
  classifiers.outer = outer;
  classifiers.inner = zero_classifier(hyper, "inner", 1);

  // sticky oracle: the clean prediction follows the current state, so guided
  // pushes persist across steps, as they do with a trained denoiser
  const NoiseSchedule s = make_schedule(6, 0.05, 0.5, ScheduleShape::linear);
  const DenoiserFn fn = [](const NoisyGraph& g) {
    CleanPrediction pred = constant_prediction(g.graph.n, 0.5, 0.5);
    for (int i = 0; i < g.graph.n; ++i) {
      pred.px1[i] = 0.2 + 0.6 * g.graph.x1[i];
      pred.px2[i] = 0.2 + 0.6 * g.graph.x2[i];
    }
    return pred;
  };
  const SampleRun run = make_run(31, 40, {6});
  const SampleResult plain = sample_unconditional(fn, s, run);
  GuidanceSettings settings;
  settings.gamma = 2.0;
  const SampleResult guided = sample_conditional(fn, classifiers, s, run, settings);
  const auto mean_x1 = [](const SampleResult& r) {
    double total = 0.0, count = 0.0;
    for (const CondGraph& g : r.graphs)
      for (int i = 0; i < g.n; ++i) {
        total += g.x1[i];
        ++count;
      }
    return total / count;
  };
  REQUIRE(mean_x1(guided) > mean_x1(plain) + 0.15);
}
