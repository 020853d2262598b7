#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdgraph/denoiser.hpp"
#include "cdgraph/eval.hpp"
#include "cdgraph/graph.hpp"
#include "cdgraph/guidance.hpp"

namespace cdgraph {

using json = nlohmann::json;

// ---------------------------------------------------------------- files

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string checksum_hex(const std::string& data) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

inline std::string file_checksum(const std::string& path) {
  return checksum_hex(read_text_file(path));
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ------------------------------------------------- edge list + attributes
//
// Single graph: edge lines "u v", attribute CSV with header node,c1,c2.
// Corpus: edge lines "g u v", attribute CSV with header graph,node,c1,c2.
// Loading auto-detects the two layouts from the attribute header.

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& path, int line, const std::string& msg) {
  throw std::runtime_error("parse error at " + path + ":" + std::to_string(line) + ": " + msg);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r' && c != ' ' && c != '\t') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline bool parse_int(const std::string& s, long& out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stol(s, &pos);
  } catch (...) {
    return false;
  }
  return pos == s.size();
}

}  // namespace detail

inline std::string corpus_to_attr_csv(const std::vector<CondGraph>& graphs, bool with_graph_id) {
  std::ostringstream out;
  out << (with_graph_id ? "graph,node,c1,c2\n" : "node,c1,c2\n");
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const CondGraph& g = graphs[gi];
    for (int i = 0; i < g.n; ++i) {
      if (with_graph_id) out << gi << ',';
      out << i << ',' << int(g.x1[i]) << ',' << int(g.x2[i]) << '\n';
    }
  }
  return out.str();
}

inline std::string corpus_to_edge_list(const std::vector<CondGraph>& graphs, bool with_graph_id) {
  std::ostringstream out;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const CondGraph& g = graphs[gi];
    for (int i = 0; i < g.n; ++i)
      for (int j = i + 1; j < g.n; ++j) {
        if (!g.edge(i, j)) continue;
        if (with_graph_id) out << gi << ' ';
        out << i << ' ' << j << '\n';
      }
  }
  return out.str();
}

inline void save_graph(const CondGraph& g, const std::string& edge_path,
                       const std::string& attr_path) {
  write_text_file(edge_path, corpus_to_edge_list({g}, false));
  write_text_file(attr_path, corpus_to_attr_csv({g}, false));
}

inline void save_corpus(const std::vector<CondGraph>& graphs, const std::string& edge_path,
                        const std::string& attr_path) {
  write_text_file(edge_path, corpus_to_edge_list(graphs, true));
  write_text_file(attr_path, corpus_to_attr_csv(graphs, true));
}

// Loads either layout. Node attribute rows define the node sets; edges must
// reference declared nodes. Duplicate and reversed edge lines are silently
// deduplicated; self-loops are rejected with their line number.
inline std::vector<CondGraph> load_dataset(const std::string& edge_path,
                                           const std::string& attr_path, int max_nodes = 100) {
  const std::string attr_text = read_text_file(attr_path);
  std::istringstream attr_in(attr_text);
  std::string line;
  int lineno = 0;

  if (!std::getline(attr_in, line)) detail::parse_fail(attr_path, 1, "missing header");
  ++lineno;
  const std::vector<std::string> header = detail::split_csv(line);
  bool with_graph_id;
  if (header == std::vector<std::string>{"node", "c1", "c2"}) with_graph_id = false;
  else if (header == std::vector<std::string>{"graph", "node", "c1", "c2"}) with_graph_id = true;
  else detail::parse_fail(attr_path, 1, "expected header node,c1,c2 or graph,node,c1,c2");

  // graph id -> node id -> (c1, c2)
  std::map<long, std::map<long, std::pair<int, int>>> nodes;
  while (std::getline(attr_in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> f = detail::split_csv(line);
    if (f.size() != (with_graph_id ? 4u : 3u))
      detail::parse_fail(attr_path, lineno, "wrong field count");
    long gid = 0, node, c1, c2;
    std::size_t k = 0;
    if (with_graph_id && !detail::parse_int(f[k++], gid))
      detail::parse_fail(attr_path, lineno, "bad graph id");
    if (!detail::parse_int(f[k++], node) || !detail::parse_int(f[k++], c1) ||
        !detail::parse_int(f[k], c2))
      detail::parse_fail(attr_path, lineno, "bad integer field");
    if (c1 < 0 || c1 > 1 || c2 < 0 || c2 > 1)
      detail::parse_fail(attr_path, lineno, "condition bits must be 0 or 1");
    if (gid < 0) detail::parse_fail(attr_path, lineno, "negative graph id");
    if (node < 0) detail::parse_fail(attr_path, lineno, "negative node id");
    if (!nodes[gid].emplace(node, std::make_pair(int(c1), int(c2))).second)
      detail::parse_fail(attr_path, lineno, "duplicate node row");
  }
  if (nodes.empty()) detail::parse_fail(attr_path, lineno, "no node rows");

  std::vector<CondGraph> graphs;
  long expected_gid = 0;
  for (const auto& [gid, table] : nodes) {
    if (gid != expected_gid++)
      throw std::runtime_error(attr_path + ": graph ids must be contiguous from 0");
    const long n = static_cast<long>(table.size());
    if (max_nodes > 0 && n > max_nodes)
      throw std::runtime_error(attr_path + ": graph " + std::to_string(gid) + " exceeds " +
                               std::to_string(max_nodes) + " nodes");
    CondGraph g(static_cast<int>(n));
    for (const auto& [node, bits] : table) {
      if (node >= n)
        throw std::runtime_error(attr_path + ": graph " + std::to_string(gid) +
                                 " node ids must be contiguous from 0");
      g.x1[node] = static_cast<std::uint8_t>(bits.first);
      g.x2[node] = static_cast<std::uint8_t>(bits.second);
    }
    graphs.push_back(std::move(g));
  }

  const std::string edge_text = read_text_file(edge_path);
  std::istringstream edge_in(edge_text);
  lineno = 0;
  while (std::getline(edge_in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    long a, b, c;
    long gid = 0, u, v;
    if (with_graph_id) {
      if (!(ls >> a >> b >> c)) detail::parse_fail(edge_path, lineno, "expected 'graph u v'");
      gid = a; u = b; v = c;
    } else {
      if (!(ls >> a >> b)) detail::parse_fail(edge_path, lineno, "expected 'u v'");
      u = a; v = b;
    }
    std::string rest;
    if (ls >> rest) detail::parse_fail(edge_path, lineno, "trailing tokens");
    if (gid < 0 || gid >= static_cast<long>(graphs.size()))
      detail::parse_fail(edge_path, lineno, "graph id out of range");
    CondGraph& g = graphs[static_cast<std::size_t>(gid)];
    if (u < 0 || v < 0 || u >= g.n || v >= g.n)
      detail::parse_fail(edge_path, lineno, "node index out of range");
    if (u == v) detail::parse_fail(edge_path, lineno, "self-loop");
    g.set_edge(static_cast<int>(u), static_cast<int>(v), 1);
  }
  for (const CondGraph& g : graphs) validate(g);
  return graphs;
}

// ----------------------------------------------------------------- DOT

inline const char* node_fill_color(const CondGraph& g, int i) {
  if (g.x1[i] && g.x2[i]) return "blue";
  if (g.x1[i]) return "green";
  if (g.x2[i]) return "yellow";
  return "red";
}

inline std::string export_dot(const CondGraph& g, const std::string& name = "g") {
  std::ostringstream out;
  out << "graph " << name << " {\n  node [style=filled];\n";
  for (int i = 0; i < g.n; ++i)
    out << "  " << i << " [fillcolor=\"" << node_fill_color(g, i) << "\"];\n";
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j)
      if (g.edge(i, j)) out << "  " << i << " -- " << j << ";\n";
  out << "}\n";
  return out.str();
}

// ------------------------------------------------------------ checkpoints

inline void check_finite(const std::vector<double>& params) {
  for (double p : params)
    if (!std::isfinite(p)) throw std::runtime_error("non-finite parameter in checkpoint");
}

inline json denoiser_to_json(const DenoiserModel& model, std::uint64_t seed) {
  check_finite(model.params);
  return json{{"version", 1},
              {"kind", "denoiser"},
              {"rounds", model.hyper.rounds},
              {"hidden", model.hyper.hidden},
              {"seed", seed},
              {"params", model.params}};
}

struct LoadedDenoiser {
  DenoiserModel model;
  std::uint64_t seed = 0;
};

inline LoadedDenoiser denoiser_from_json(const json& j) {
  if (j.at("kind").get<std::string>() != "denoiser")
    throw std::runtime_error("checkpoint is not a denoiser");
  if (j.at("version").get<int>() != 1) throw std::runtime_error("unknown checkpoint version");
  LoadedDenoiser out;
  out.model.hyper.rounds = j.at("rounds").get<int>();
  out.model.hyper.hidden = j.at("hidden").get<int>();
  out.seed = j.at("seed").get<std::uint64_t>();
  out.model.params = j.at("params").get<std::vector<double>>();
  if (out.model.params.size() != denoiser_param_count(out.model.hyper))
    throw std::runtime_error("checkpoint parameter count does not match hyperparameters");
  return out;
}

inline void save_denoiser(const DenoiserModel& model, std::uint64_t seed,
                          const std::string& path) {
  write_text_file(path, denoiser_to_json(model, seed).dump(2) + "\n");
}

inline LoadedDenoiser load_denoiser(const std::string& path) {
  return denoiser_from_json(json::parse(read_text_file(path)));
}

inline json classifier_to_json(const ClassifierModel& model, int outer_condition,
                               std::uint64_t seed) {
  check_finite(model.params);
  return json{{"version", 1},
              {"kind", "classifier"},
              {"role", model.role},
              {"target_condition", model.target_condition},
              {"outer_condition", outer_condition},
              {"rounds", model.hyper.rounds},
              {"hidden", model.hyper.hidden},
              {"seed", seed},
              {"params", model.params}};
}

inline ClassifierModel classifier_from_json(const json& j, int* outer_condition = nullptr) {
  if (j.at("kind").get<std::string>() != "classifier")
    throw std::runtime_error("checkpoint is not a classifier");
  if (j.at("version").get<int>() != 1) throw std::runtime_error("unknown checkpoint version");
  ClassifierModel m;
  m.role = j.at("role").get<std::string>();
  m.target_condition = j.at("target_condition").get<int>();
  m.hyper.rounds = j.at("rounds").get<int>();
  m.hyper.hidden = j.at("hidden").get<int>();
  m.params = j.at("params").get<std::vector<double>>();
  if (m.params.size() != classifier_param_count(m.hyper))
    throw std::runtime_error("checkpoint parameter count does not match hyperparameters");
  if (outer_condition) *outer_condition = j.at("outer_condition").get<int>();
  return m;
}

inline void save_classifiers(const GuidanceClassifiers& c, std::uint64_t seed,
                             const std::string& outer_path, const std::string& inner_path) {
  write_text_file(outer_path, classifier_to_json(c.outer, c.outer_condition, seed).dump(2) + "\n");
  write_text_file(inner_path, classifier_to_json(c.inner, c.outer_condition, seed).dump(2) + "\n");
}

inline GuidanceClassifiers load_classifiers(const std::string& outer_path,
                                            const std::string& inner_path) {
  GuidanceClassifiers c;
  int outer_cond = 0;
  c.outer = classifier_from_json(json::parse(read_text_file(outer_path)), &outer_cond);
  c.outer_condition = outer_cond;
  int inner_outer_cond = 0;
  c.inner = classifier_from_json(json::parse(read_text_file(inner_path)), &inner_outer_cond);
  if (c.outer.role != "outer" || c.inner.role != "inner")
    throw std::runtime_error("classifier checkpoints have wrong roles");
  if (inner_outer_cond != outer_cond)
    throw std::runtime_error("classifier checkpoints disagree on the outer condition");
  return c;
}

// ----------------------------------------------------------- eval report

inline json report_to_json(const EvalReport& r) {
  return json{{"version", 1},
              {"validity", r.validity},
              {"rel_err_nodes", r.rel_err_nodes},
              {"rel_err_edges", r.rel_err_edges},
              {"rel_err_density", r.rel_err_density},
              {"mmd_clustering", r.mmd_clustering},
              {"reference_count", r.reference_count},
              {"generated_count", r.generated_count},
              {"reference_qualifying", r.reference_qualifying},
              {"generated_qualifying", r.generated_qualifying},
              {"mmd_choices",
               {{"bins", r.mmd_bins},
                {"sigma", r.mmd_sigma},
                {"kernel", r.mmd_kernel},
                {"estimator", r.mmd_estimator}}}};
}

inline EvalReport report_from_json(const json& j) {
  if (j.at("version").get<int>() != 1) throw std::runtime_error("unknown report version");
  EvalReport r;
  r.validity = j.at("validity").get<double>();
  r.rel_err_nodes = j.at("rel_err_nodes").get<double>();
  r.rel_err_edges = j.at("rel_err_edges").get<double>();
  r.rel_err_density = j.at("rel_err_density").get<double>();
  r.mmd_clustering = j.at("mmd_clustering").get<double>();
  r.reference_count = j.at("reference_count").get<int>();
  r.generated_count = j.at("generated_count").get<int>();
  r.reference_qualifying = j.at("reference_qualifying").get<int>();
  r.generated_qualifying = j.at("generated_qualifying").get<int>();
  const json& m = j.at("mmd_choices");
  r.mmd_bins = m.at("bins").get<int>();
  r.mmd_sigma = m.at("sigma").get<double>();
  r.mmd_kernel = m.at("kernel").get<std::string>();
  r.mmd_estimator = m.at("estimator").get<std::string>();
  return r;
}

inline void save_report(const EvalReport& r, const std::string& path) {
  write_text_file(path, report_to_json(r).dump(2) + "\n");
}

inline EvalReport load_report(const std::string& path) {
  return report_from_json(json::parse(read_text_file(path)));
}

// ------------------------------------------------------------ loss traces

inline std::string trace_to_csv(const std::vector<double>& trace) {
  std::ostringstream out;
  out << "step,loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) out << i << ',' << format_double(trace[i]) << '\n';
  return out.str();
}

// -------------------------------------------------------------- manifest

// Every CLI run records its resolved configuration, seeds and artifact
// checksums; replaying a manifest reproduces the artifacts byte for byte.
struct Manifest {
  std::string command;
  json config;
  json args;
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;
};

inline json manifest_to_json(const Manifest& m) {
  return json{{"version", 1}, {"command", m.command}, {"config", m.config},
              {"args", m.args}, {"inputs", m.inputs},  {"outputs", m.outputs}};
}

inline Manifest manifest_from_json(const json& j) {
  if (j.at("version").get<int>() != 1) throw std::runtime_error("unknown manifest version");
  Manifest m;
  m.command = j.at("command").get<std::string>();
  m.config = j.at("config");
  m.args = j.at("args");
  m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
  m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  return m;
}

inline void save_manifest(const Manifest& m, const std::string& path) {
  write_text_file(path, manifest_to_json(m).dump(2) + "\n");
}

inline Manifest load_manifest(const std::string& path) {
  return manifest_from_json(json::parse(read_text_file(path)));
}

}  // namespace cdgraph
