// Command line front end: corpus generation, training, sampling, evaluation
// and DOT export, with a reproducibility manifest written for every run.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdgraph/config.hpp"
#include "cdgraph/datagen.hpp"
#include "cdgraph/denoiser.hpp"
#include "cdgraph/eval.hpp"
#include "cdgraph/guidance.hpp"
#include "cdgraph/io.hpp"
#include "cdgraph/sampler.hpp"

namespace fs = std::filesystem;
using cdgraph::json;

namespace {

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::string manifest_path_for(const std::string& out) {
  std::string base = out;
  const std::string suffix = ".json";
  if (base.size() > suffix.size() && base.ends_with(suffix))
    base.resize(base.size() - suffix.size());
  return base + ".manifest.json";
}

// Move an output path into another directory, keeping its file name.
std::string redirect(const std::string& path, const std::string& out_dir) {
  if (out_dir.empty()) return path;
  return (fs::path(out_dir) / fs::path(path).filename()).string();
}

struct CorpusPaths {
  std::string edges;
  std::string attrs;
};

CorpusPaths corpus_paths(const std::string& prefix) {
  return {prefix + ".edges", prefix + ".csv"};
}

std::vector<cdgraph::CondGraph> load_corpus_prefix(const std::string& prefix) {
  const CorpusPaths p = corpus_paths(prefix);
  return cdgraph::load_dataset(p.edges, p.attrs);
}

void finish_manifest(cdgraph::Manifest& m, const std::string& manifest_path) {
  ensure_parent_dir(manifest_path);
  cdgraph::save_manifest(m, manifest_path);
  std::cout << "wrote " << manifest_path << "\n";
}

void record_output(cdgraph::Manifest& m, const std::string& path) {
  m.outputs[path] = cdgraph::file_checksum(path);
  std::cout << "wrote " << path << "\n";
}

void record_input(cdgraph::Manifest& m, const std::string& path) {
  m.inputs[path] = cdgraph::file_checksum(path);
}

// ----------------------------------------------------------------- commands
//
// Each command takes the resolved config plus plain argument values so that
// replay can re-enter it from a manifest.

void run_gen_data(const cdgraph::RunConfig& cfg, const json& cfg_json,
                  const std::string& out_prefix) {
  const std::vector<cdgraph::CondGraph> corpus = cdgraph::generate_corpus(cfg.synth);
  const CorpusPaths out = corpus_paths(out_prefix);
  ensure_parent_dir(out.edges);
  cdgraph::save_corpus(corpus, out.edges, out.attrs);
  const double phi = cdgraph::condition_correlation(corpus);
  std::cout << "generated " << corpus.size() << " graphs, measured phi " << phi << "\n";

  cdgraph::Manifest m;
  m.command = "gen-data";
  m.config = cfg_json;
  m.args = json{{"out", out_prefix}};
  record_output(m, out.edges);
  record_output(m, out.attrs);
  finish_manifest(m, manifest_path_for(out_prefix));
}

void run_train(const cdgraph::RunConfig& cfg, const json& cfg_json,
               const std::string& corpus_prefix, const std::string& out_model) {
  const std::vector<cdgraph::CondGraph> corpus = load_corpus_prefix(corpus_prefix);
  const cdgraph::NoiseSchedule schedule = cdgraph::make_schedule(cfg.schedule);
  cdgraph::TrainConfig tc;
  tc.adam = cfg.adam;
  tc.batch = cfg.batch;
  tc.steps = cfg.steps;
  tc.lambda = cfg.lambda;
  tc.seed = cfg.seeds.train;
  const cdgraph::TrainResult result = cdgraph::train(corpus, schedule, cfg.denoiser, tc);
  ensure_parent_dir(out_model);
  cdgraph::save_denoiser(result.model, tc.seed, out_model);
  const std::string trace_path = out_model + ".loss.csv";
  cdgraph::write_text_file(trace_path, cdgraph::trace_to_csv(result.loss_trace));
  std::cout << "trained denoiser, final batch loss " << result.loss_trace.back() << "\n";

  cdgraph::Manifest m;
  m.command = "train";
  m.config = cfg_json;
  m.args = json{{"corpus", corpus_prefix}, {"out", out_model}};
  record_input(m, corpus_paths(corpus_prefix).edges);
  record_input(m, corpus_paths(corpus_prefix).attrs);
  record_output(m, out_model);
  record_output(m, trace_path);
  finish_manifest(m, manifest_path_for(out_model));
}

void run_train_classifiers(const cdgraph::RunConfig& cfg, const json& cfg_json,
                           const std::string& corpus_prefix, const std::string& out_prefix) {
  const std::vector<cdgraph::CondGraph> corpus = load_corpus_prefix(corpus_prefix);
  const cdgraph::NoiseSchedule schedule = cdgraph::make_schedule(cfg.schedule);
  cdgraph::ClassifierTrainConfig cc;
  cc.adam = cfg.adam;
  cc.batch = cfg.batch;
  cc.steps = cfg.classifier_steps;
  cc.seed = cfg.seeds.classifiers;
  cc.outer_condition = cfg.guidance.outer_condition;
  const cdgraph::ClassifierTrainResult result =
      cdgraph::train_classifiers(corpus, schedule, cfg.denoiser, cc);
  const std::string outer_path = out_prefix + ".outer.json";
  const std::string inner_path = out_prefix + ".inner.json";
  ensure_parent_dir(outer_path);
  cdgraph::save_classifiers(result.classifiers, cc.seed, outer_path, inner_path);
  const std::string outer_trace = out_prefix + ".outer.loss.csv";
  const std::string inner_trace = out_prefix + ".inner.loss.csv";
  cdgraph::write_text_file(outer_trace, cdgraph::trace_to_csv(result.outer_trace));
  cdgraph::write_text_file(inner_trace, cdgraph::trace_to_csv(result.inner_trace));
  std::cout << "trained guidance classifiers (outer condition c"
            << cfg.guidance.outer_condition << ")\n";

  cdgraph::Manifest m;
  m.command = "train-classifiers";
  m.config = cfg_json;
  m.args = json{{"corpus", corpus_prefix}, {"out", out_prefix}};
  record_input(m, corpus_paths(corpus_prefix).edges);
  record_input(m, corpus_paths(corpus_prefix).attrs);
  record_output(m, outer_path);
  record_output(m, inner_path);
  record_output(m, outer_trace);
  record_output(m, inner_trace);
  finish_manifest(m, manifest_path_for(out_prefix));
}

void run_sample(const cdgraph::RunConfig& cfg, const json& cfg_json,
                const std::string& model_path, const std::string& corpus_prefix,
                const std::string& classifiers_prefix, bool guided, double gamma,
                std::uint64_t seed, int num_graphs, const std::string& out_prefix,
                const std::string& trace_dir) {
  const cdgraph::LoadedDenoiser loaded = cdgraph::load_denoiser(model_path);
  const std::vector<cdgraph::CondGraph> corpus = load_corpus_prefix(corpus_prefix);
  const cdgraph::NoiseSchedule schedule = cdgraph::make_schedule(cfg.schedule);
  std::vector<int> sizes;
  for (const cdgraph::CondGraph& g : corpus) sizes.push_back(g.n);
  const cdgraph::SampleRun run =
      cdgraph::make_run(seed, num_graphs, sizes, !trace_dir.empty());
  const cdgraph::DenoiserFn fn = cdgraph::make_denoiser_fn(loaded.model, schedule.T);

  cdgraph::Manifest m;
  m.command = "sample";
  m.config = cfg_json;
  m.args = json{{"model", model_path},     {"corpus", corpus_prefix},
                {"classifiers", classifiers_prefix}, {"guided", guided},
                {"gamma", gamma},          {"seed", seed},
                {"num", num_graphs},       {"out", out_prefix},
                {"trace_dir", trace_dir}};
  record_input(m, model_path);
  record_input(m, corpus_paths(corpus_prefix).edges);
  record_input(m, corpus_paths(corpus_prefix).attrs);

  cdgraph::SampleResult result;
  if (guided) {
    if (classifiers_prefix.empty())
      throw std::runtime_error("--guided requires --classifiers");
    const cdgraph::GuidanceClassifiers classifiers = cdgraph::load_classifiers(
        classifiers_prefix + ".outer.json", classifiers_prefix + ".inner.json");
    record_input(m, classifiers_prefix + ".outer.json");
    record_input(m, classifiers_prefix + ".inner.json");
    cdgraph::GuidanceSettings settings;
    settings.gamma = gamma;
    settings.hard_gate = cfg.guidance.hard_gate;
    settings.guide_reconstruction = cfg.guidance.guide_reconstruction;
    result = cdgraph::sample_conditional(fn, classifiers, schedule, run, settings);
  } else {
    result = cdgraph::sample_unconditional(fn, schedule, run);
  }

  const CorpusPaths out = corpus_paths(out_prefix);
  ensure_parent_dir(out.edges);
  cdgraph::save_corpus(result.graphs, out.edges, out.attrs);
  record_output(m, out.edges);
  record_output(m, out.attrs);

  if (!trace_dir.empty()) {
    fs::create_directories(trace_dir);
    for (std::size_t k = 0; k < result.traces.size(); ++k)
      for (const cdgraph::NoisyGraph& snap : result.traces[k]) {
        const std::string base =
            (fs::path(trace_dir) / ("g" + std::to_string(k) + "_t" + std::to_string(snap.t)))
                .string();
        cdgraph::save_graph(snap.graph, base + ".edges", base + ".csv");
        record_output(m, base + ".edges");
        record_output(m, base + ".csv");
      }
  }
  std::cout << "sampled " << result.graphs.size() << (guided ? " guided" : " unguided")
            << " graphs\n";
  finish_manifest(m, manifest_path_for(out_prefix));
}

void run_eval(const std::string& ref_prefix, const std::string& gen_prefix,
              const std::string& out_report) {
  const std::vector<cdgraph::CondGraph> reference = load_corpus_prefix(ref_prefix);
  const std::vector<cdgraph::CondGraph> generated = load_corpus_prefix(gen_prefix);
  const cdgraph::EvalReport report = cdgraph::evaluate(reference, generated);
  ensure_parent_dir(out_report);
  cdgraph::save_report(report, out_report);
  std::cout << "validity " << report.validity << ", rel errs (" << report.rel_err_nodes << ", "
            << report.rel_err_edges << ", " << report.rel_err_density << "), mmd "
            << report.mmd_clustering << "\n";

  cdgraph::Manifest m;
  m.command = "eval";
  m.config = json::object();
  m.args = json{{"reference", ref_prefix}, {"generated", gen_prefix}, {"out", out_report}};
  record_input(m, corpus_paths(ref_prefix).edges);
  record_input(m, corpus_paths(ref_prefix).attrs);
  record_input(m, corpus_paths(gen_prefix).edges);
  record_input(m, corpus_paths(gen_prefix).attrs);
  record_output(m, out_report);
  finish_manifest(m, manifest_path_for(out_report));
}

void run_export_dot(const std::string& graphs_prefix, const std::string& out_dir) {
  const std::vector<cdgraph::CondGraph> graphs = load_corpus_prefix(graphs_prefix);
  fs::create_directories(out_dir);

  cdgraph::Manifest m;
  m.command = "export-dot";
  m.config = json::object();
  m.args = json{{"graphs", graphs_prefix}, {"out_dir", out_dir}};
  record_input(m, corpus_paths(graphs_prefix).edges);
  record_input(m, corpus_paths(graphs_prefix).attrs);
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const std::string path = (fs::path(out_dir) / ("graph_" + std::to_string(k) + ".dot")).string();
    cdgraph::write_text_file(path, cdgraph::export_dot(graphs[k], "g" + std::to_string(k)));
    record_output(m, path);
  }
  std::cout << "exported " << graphs.size() << " DOT files\n";
  finish_manifest(m, (fs::path(out_dir) / "export.manifest.json").string());
}

void run_replay(const std::string& manifest_file, const std::string& out_dir) {
  const cdgraph::Manifest m = cdgraph::load_manifest(manifest_file);
  const json& a = m.args;
  const auto str = [&a](const char* key) { return a.at(key).get<std::string>(); };
  if (m.command == "gen-data") {
    run_gen_data(cdgraph::run_config_from_json(m.config), m.config, redirect(str("out"), out_dir));
  } else if (m.command == "train") {
    run_train(cdgraph::run_config_from_json(m.config), m.config, str("corpus"),
              redirect(str("out"), out_dir));
  } else if (m.command == "train-classifiers") {
    run_train_classifiers(cdgraph::run_config_from_json(m.config), m.config, str("corpus"),
                          redirect(str("out"), out_dir));
  } else if (m.command == "sample") {
    run_sample(cdgraph::run_config_from_json(m.config), m.config, str("model"), str("corpus"),
               str("classifiers"), a.at("guided").get<bool>(), a.at("gamma").get<double>(),
               a.at("seed").get<std::uint64_t>(), a.at("num").get<int>(),
               redirect(str("out"), out_dir),
               str("trace_dir").empty() ? std::string() : redirect(str("trace_dir"), out_dir));
  } else if (m.command == "eval") {
    run_eval(str("reference"), str("generated"), redirect(str("out"), out_dir));
  } else if (m.command == "export-dot") {
    run_export_dot(str("graphs"), out_dir.empty() ? str("out_dir") : out_dir);
  } else {
    throw std::runtime_error("unknown command in manifest: " + m.command);
  }
}

json load_config_json(const std::string& path) {
  if (path.empty()) return cdgraph::to_json(cdgraph::RunConfig{});
  return json::parse(cdgraph::read_text_file(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-conditional social graph diffusion"};
  app.require_subcommand(1);

  std::string config_path, out, corpus, model_path, classifiers, ref_prefix, gen_prefix;
  std::string manifest_file, out_dir, trace_dir, graphs_prefix;
  bool guided = false;
  double gamma = -1.0;
  int num_graphs = 32;
  std::int64_t seed_flag = -1;

  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic corpus");
  gen->add_option("--config", config_path, "run configuration file");
  gen->add_option("--out", out, "output corpus prefix")->required();

  CLI::App* tr = app.add_subcommand("train", "train the denoiser");
  tr->add_option("--config", config_path, "run configuration file");
  tr->add_option("--corpus", corpus, "training corpus prefix")->required();
  tr->add_option("--out", out, "output model checkpoint path")->required();

  CLI::App* trc = app.add_subcommand("train-classifiers", "train the guidance classifier pair");
  trc->add_option("--config", config_path, "run configuration file");
  trc->add_option("--corpus", corpus, "training corpus prefix")->required();
  trc->add_option("--out", out, "output checkpoint prefix")->required();

  CLI::App* sa = app.add_subcommand("sample", "generate graphs from a trained model");
  sa->add_option("--config", config_path, "run configuration file");
  sa->add_option("--model", model_path, "denoiser checkpoint")->required();
  sa->add_option("--corpus", corpus, "training corpus prefix (node size distribution)")
      ->required();
  sa->add_option("--classifiers", classifiers, "classifier checkpoint prefix");
  sa->add_flag("--guided", guided, "apply dual-condition classifier guidance");
  sa->add_option("--gamma", gamma, "guidance strength override");
  sa->add_option("--num", num_graphs, "number of graphs to sample");
  sa->add_option("--seed", seed_flag, "sampling seed override");
  sa->add_option("--trace-dir", trace_dir, "write per-step snapshots here");
  sa->add_option("--out", out, "output corpus prefix")->required();

  CLI::App* ev = app.add_subcommand("eval", "evaluate generated against reference graphs");
  ev->add_option("--reference", ref_prefix, "reference corpus prefix")->required();
  ev->add_option("--generated", gen_prefix, "generated corpus prefix")->required();
  ev->add_option("--out", out, "output report path")->required();

  CLI::App* ex = app.add_subcommand("export-dot", "write one DOT file per graph");
  ex->add_option("--graphs", graphs_prefix, "corpus prefix")->required();
  ex->add_option("--out-dir", out_dir, "output directory")->required();

  CLI::App* re = app.add_subcommand("replay", "re-run a recorded manifest");
  re->add_option("--manifest", manifest_file, "manifest file")->required();
  re->add_option("--out-dir", out_dir, "redirect outputs into this directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed() || tr->parsed() || trc->parsed() || sa->parsed()) {
      const json cfg_json = load_config_json(config_path);
      const cdgraph::RunConfig cfg = cdgraph::run_config_from_json(cfg_json);
      if (gen->parsed()) {
        run_gen_data(cfg, cfg_json, out);
      } else if (tr->parsed()) {
        run_train(cfg, cfg_json, corpus, out);
      } else if (trc->parsed()) {
        run_train_classifiers(cfg, cfg_json, corpus, out);
      } else {
        const double g = gamma >= 0.0 ? gamma : cfg.guidance.gamma;
        const std::uint64_t seed =
            seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag) : cfg.seeds.sample;
        run_sample(cfg, cfg_json, model_path, corpus, classifiers, guided, g, seed, num_graphs,
                   out, trace_dir);
      }
    } else if (ev->parsed()) {
      run_eval(ref_prefix, gen_prefix, out);
    } else if (ex->parsed()) {
      run_export_dot(graphs_prefix, out_dir);
    } else if (re->parsed()) {
      run_replay(manifest_file, out_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
