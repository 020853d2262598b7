#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cdgraph/datagen.hpp"
#include "cdgraph/denoiser.hpp"
#include "cdgraph/guidance.hpp"
#include "cdgraph/io.hpp"
#include "cdgraph/schedule.hpp"

namespace cdgraph {

// One structured-text configuration file drives every CLI command. Missing
// keys take the defaults below; every numeric range is enforced at parse.
struct ScheduleConfig {
  int T = 50;
  double beta_min = 0.02;
  double beta_max = 0.6;
  std::string shape = "linear";
};

struct GuidanceConfig {
  double gamma = 1.0;
  int outer_condition = 2;
  bool hard_gate = false;
  bool guide_reconstruction = true;
};

struct SeedsConfig {
  std::uint64_t train = 1;
  std::uint64_t classifiers = 2;
  std::uint64_t sample = 3;
};

struct RunConfig {
  ScheduleConfig schedule;
  DenoiserHyper denoiser;
  AdamParams adam;
  int batch = 8;
  int steps = 3000;
  double lambda = 1.0;
  int classifier_steps = 2000;
  double contagion_p = 0.8;
  GuidanceConfig guidance;
  SeedsConfig seeds;
  SynthConfig synth;
};

inline NoiseSchedule make_schedule(const ScheduleConfig& c) {
  return make_schedule(c.T, c.beta_min, c.beta_max, schedule_shape_from_string(c.shape));
}

inline json to_json(const RunConfig& c) {
  return json{
      {"version", 1},
      {"schedule",
       {{"T", c.schedule.T},
        {"beta_min", c.schedule.beta_min},
        {"beta_max", c.schedule.beta_max},
        {"shape", c.schedule.shape}}},
      {"denoiser", {{"rounds", c.denoiser.rounds}, {"hidden", c.denoiser.hidden}}},
      {"optimizer",
       {{"lr", c.adam.lr},
        {"beta1", c.adam.beta1},
        {"beta2", c.adam.beta2},
        {"eps", c.adam.eps},
        {"batch", c.batch},
        {"steps", c.steps}}},
      {"lambda", c.lambda},
      {"classifier_steps", c.classifier_steps},
      {"contagion_p", c.contagion_p},
      {"guidance",
       {{"gamma", c.guidance.gamma},
        {"outer_condition", c.guidance.outer_condition},
        {"hard_gate", c.guidance.hard_gate},
        {"guide_reconstruction", c.guidance.guide_reconstruction}}},
      {"seeds",
       {{"train", c.seeds.train},
        {"classifiers", c.seeds.classifiers},
        {"sample", c.seeds.sample}}},
      {"synth",
       {{"num_graphs", c.synth.num_graphs},
        {"n_min", c.synth.n_min},
        {"n_max", c.synth.n_max},
        {"rho_target", c.synth.rho_target},
        {"p_in", c.synth.p_in},
        {"p_out", c.synth.p_out},
        {"base_rate", c.synth.base_rate},
        {"seed", c.synth.seed}}}};
}

namespace detail {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

inline json section(const json& j, const char* key) {
  return j.is_object() && j.contains(key) ? j.at(key) : json::object();
}

}  // namespace detail

inline RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  if (!j.is_object()) throw std::invalid_argument("config root must be an object");
  if (detail::get_or<int>(j, "version", 1) != 1)
    throw std::invalid_argument("unknown config version");

  const json sch = detail::section(j, "schedule");
  c.schedule.T = detail::get_or(sch, "T", c.schedule.T);
  c.schedule.beta_min = detail::get_or(sch, "beta_min", c.schedule.beta_min);
  c.schedule.beta_max = detail::get_or(sch, "beta_max", c.schedule.beta_max);
  c.schedule.shape = detail::get_or<std::string>(sch, "shape", c.schedule.shape);

  const json den = detail::section(j, "denoiser");
  c.denoiser.rounds = detail::get_or(den, "rounds", c.denoiser.rounds);
  c.denoiser.hidden = detail::get_or(den, "hidden", c.denoiser.hidden);

  const json opt = detail::section(j, "optimizer");
  c.adam.lr = detail::get_or(opt, "lr", c.adam.lr);
  c.adam.beta1 = detail::get_or(opt, "beta1", c.adam.beta1);
  c.adam.beta2 = detail::get_or(opt, "beta2", c.adam.beta2);
  c.adam.eps = detail::get_or(opt, "eps", c.adam.eps);
  c.batch = detail::get_or(opt, "batch", c.batch);
  c.steps = detail::get_or(opt, "steps", c.steps);

  c.lambda = detail::get_or(j, "lambda", c.lambda);
  c.classifier_steps = detail::get_or(j, "classifier_steps", c.classifier_steps);
  c.contagion_p = detail::get_or(j, "contagion_p", c.contagion_p);

  const json gui = detail::section(j, "guidance");
  c.guidance.gamma = detail::get_or(gui, "gamma", c.guidance.gamma);
  c.guidance.outer_condition = detail::get_or(gui, "outer_condition", c.guidance.outer_condition);
  c.guidance.hard_gate = detail::get_or(gui, "hard_gate", c.guidance.hard_gate);
  c.guidance.guide_reconstruction =
      detail::get_or(gui, "guide_reconstruction", c.guidance.guide_reconstruction);

  const json seeds = detail::section(j, "seeds");
  c.seeds.train = detail::get_or(seeds, "train", c.seeds.train);
  c.seeds.classifiers = detail::get_or(seeds, "classifiers", c.seeds.classifiers);
  c.seeds.sample = detail::get_or(seeds, "sample", c.seeds.sample);

  const json syn = detail::section(j, "synth");
  c.synth.num_graphs = detail::get_or(syn, "num_graphs", c.synth.num_graphs);
  c.synth.n_min = detail::get_or(syn, "n_min", c.synth.n_min);
  c.synth.n_max = detail::get_or(syn, "n_max", c.synth.n_max);
  c.synth.rho_target = detail::get_or(syn, "rho_target", c.synth.rho_target);
  c.synth.p_in = detail::get_or(syn, "p_in", c.synth.p_in);
  c.synth.p_out = detail::get_or(syn, "p_out", c.synth.p_out);
  c.synth.base_rate = detail::get_or(syn, "base_rate", c.synth.base_rate);
  c.synth.seed = detail::get_or(syn, "seed", c.synth.seed);

  // range checks; schedule and synth sections validate themselves on use
  if (c.schedule.T < 1) throw std::invalid_argument("schedule T must be at least 1");
  if (!(c.schedule.beta_min > 0.0 && c.schedule.beta_max < 1.0 &&
        c.schedule.beta_min <= c.schedule.beta_max))
    throw std::invalid_argument("betas must satisfy 0 < beta_min <= beta_max < 1");
  if (c.denoiser.rounds < 1 || c.denoiser.hidden < 1)
    throw std::invalid_argument("denoiser hyperparameters must be positive");
  if (c.batch < 1 || c.steps < 0 || c.classifier_steps < 0)
    throw std::invalid_argument("optimizer step counts must be nonnegative, batch positive");
  if (!(c.adam.lr >= 0.0)) throw std::invalid_argument("learning rate must be nonnegative");
  if (c.lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (!(c.contagion_p > 0.5 && c.contagion_p < 1.0))
    throw std::invalid_argument("contagion_p must lie in (1/2, 1)");
  if (c.guidance.gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
  if (c.guidance.outer_condition != 1 && c.guidance.outer_condition != 2)
    throw std::invalid_argument("outer_condition must be 1 or 2");
  validate(c.synth);
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  return run_config_from_json(json::parse(read_text_file(path)));
}

}  // namespace cdgraph
