#pragma once

#include <yaml-cpp/yaml.h>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "factcg/digest.hpp"
#include "factcg/error.hpp"
#include "factcg/graph/subgraph.hpp"
#include "factcg/prompt/templates.hpp"
#include "factcg/synth/pipeline.hpp"

namespace factcg {

namespace fs = std::filesystem;

struct BackendConfig {
  std::string kind = "mock";  // mock | http
  std::string endpoint;
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4o";
  int max_in_flight = 4;
  std::string api_key_env = "FACTCG_API_KEY";
  std::string auth_header = "Authorization";
  std::string auth_prefix = "Bearer ";
  std::string fixtures;  // mock completions file
  double temperature = 0.0;
  int max_tokens = 2048;
  int timeout_seconds = 120;
  std::string cache_dir;  // empty: in-memory cache
};

struct ScorerConfig {
  std::string kind = "mock";  // mock | http
  std::string endpoint;
  double entail_threshold = 0.9;
  int max_batch = 32;
};

struct SeedConfig {
  std::uint64_t synthesis = 13;
  std::uint64_t hopscan = 13;
  std::uint64_t core = 0;
  std::uint64_t bootstrap = 0;
};

struct EvalConfig {
  int budget_tokens = 400;
  double grid_step = 0.01;
  std::optional<double> fixed_threshold;
};

struct HopscanConfig {
  std::size_t sample_size = 500;
};

struct PipelineConfig {
  BackendConfig backend;
  ScorerConfig scorer;
  SeedConfig seeds;
  std::string prompts_dir = "prompts";
  prompt::Delimiters delimiters;
  synth::SynthesisConfig synthesis;
  EvalConfig eval;
  HopscanConfig hopscan;
  std::size_t workers = 4;
};

struct ConfigResult {
  std::optional<PipelineConfig> config;
  std::vector<std::string> violations;
};

namespace detail {

struct Reader {
  std::vector<std::string>& violations;

  template <typename T>
  void read(const YAML::Node& parent, const char* key, const std::string& where, T& out) {
    const YAML::Node n = parent[key];
    if (!n || n.IsNull()) return;
    try {
      out = n.as<T>();
    } catch (const YAML::Exception&) {
      violations.push_back(where + key + ": wrong type");
    }
  }
};

inline YAML::Node section(const YAML::Node& root, const char* key, std::vector<std::string>& violations) {
  YAML::Node n = root[key];
  if (n && !n.IsNull() && !n.IsMap()) {
    violations.push_back(std::string(key) + ": expected a mapping");
    return YAML::Node(YAML::NodeType::Map);
  }
  return n ? n : YAML::Node(YAML::NodeType::Map);
}

// Sets a dotted key ("synthesis.hops") to a YAML-parsed value.
inline void set_path(YAML::Node node, std::span<const std::string> keys, const YAML::Node& value) {
  if (keys.size() == 1) {
    node[keys[0]] = value;
    return;
  }
  if (!node[keys[0]] || !node[keys[0]].IsMap()) node[keys[0]] = YAML::Node(YAML::NodeType::Map);
  set_path(node[keys[0]], keys.subspan(1), value);
}

inline fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace detail

// "key.sub=value" overrides applied before decoding.
inline void apply_override(YAML::Node& root, std::string_view assignment) {
  auto eq = assignment.find('=');
  require(eq != std::string_view::npos && eq > 0, ErrorKind::kConfig,
          "override must look like key=value: " + std::string(assignment));
  std::vector<std::string> keys;
  std::string_view path = assignment.substr(0, eq);
  for (std::size_t start = 0;;) {
    auto dot = path.find('.', start);
    keys.emplace_back(path.substr(start, dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  YAML::Node value;
  try {
    value = YAML::Load(std::string(assignment.substr(eq + 1)));
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::kConfig, "override value for " + std::string(path) + ": " + e.what());
  }
  detail::set_path(root, keys, value);
}

// Decodes and checks a config tree. Relative paths resolve against `base`.
// Every violation is collected; a config comes back only when there are none.
inline ConfigResult decode_config(const YAML::Node& root, const fs::path& base = {}) {
  ConfigResult res;
  auto& v = res.violations;
  if (root && !root.IsNull() && !root.IsMap()) {
    v.push_back("config root must be a mapping");
    return res;
  }
  PipelineConfig c;
  detail::Reader rd{v};

  auto b = detail::section(root, "backend", v);
  rd.read(b, "kind", "backend.", c.backend.kind);
  rd.read(b, "endpoint", "backend.", c.backend.endpoint);
  rd.read(b, "path", "backend.", c.backend.path);
  rd.read(b, "model", "backend.", c.backend.model);
  rd.read(b, "max_in_flight", "backend.", c.backend.max_in_flight);
  rd.read(b, "api_key_env", "backend.", c.backend.api_key_env);
  rd.read(b, "auth_header", "backend.", c.backend.auth_header);
  rd.read(b, "auth_prefix", "backend.", c.backend.auth_prefix);
  rd.read(b, "fixtures", "backend.", c.backend.fixtures);
  rd.read(b, "temperature", "backend.", c.backend.temperature);
  rd.read(b, "max_tokens", "backend.", c.backend.max_tokens);
  rd.read(b, "timeout_seconds", "backend.", c.backend.timeout_seconds);
  rd.read(b, "cache_dir", "backend.", c.backend.cache_dir);

  auto s = detail::section(root, "scorer", v);
  rd.read(s, "kind", "scorer.", c.scorer.kind);
  rd.read(s, "endpoint", "scorer.", c.scorer.endpoint);
  rd.read(s, "entail_threshold", "scorer.", c.scorer.entail_threshold);
  rd.read(s, "max_batch", "scorer.", c.scorer.max_batch);

  auto seeds = detail::section(root, "seeds", v);
  rd.read(seeds, "synthesis", "seeds.", c.seeds.synthesis);
  rd.read(seeds, "hopscan", "seeds.", c.seeds.hopscan);
  rd.read(seeds, "core", "seeds.", c.seeds.core);
  rd.read(seeds, "bootstrap", "seeds.", c.seeds.bootstrap);

  rd.read(root, "prompts_dir", "", c.prompts_dir);
  rd.read(root, "workers", "", c.workers);

  auto d = detail::section(root, "delimiters", v);
  rd.read(d, "tuple", "delimiters.", c.delimiters.tuple);
  rd.read(d, "group", "delimiters.", c.delimiters.group);

  auto sy = detail::section(root, "synthesis", v);
  auto& scfg = c.synthesis;
  rd.read(sy, "hops", "synthesis.", scfg.hops);
  std::vector<std::string> shapes;
  rd.read(sy, "shapes", "synthesis.", shapes);
  if (sy["shape"]) {
    std::string one;
    rd.read(sy, "shape", "synthesis.", one);
    if (!one.empty()) shapes = {one};
  }
  if (!shapes.empty()) {
    scfg.shapes.clear();
    for (const auto& name : shapes) {
      if (auto sh = graph::parse_shape(name)) {
        scfg.shapes.push_back(*sh);
      } else {
        v.push_back("synthesis.shapes: unknown shape '" + name + "'");
      }
    }
  }
  rd.read(sy, "max_subgraphs_per_doc", "synthesis.", scfg.max_subgraphs_per_doc);
  rd.read(sy, "corrupt_fraction", "synthesis.", scfg.corrupt_fraction);
  rd.read(sy, "nli_filter", "synthesis.", scfg.nli_filter);
  for (auto [key, target] : {std::pair{"hotpotqa_policy", &scfg.hotpot_policy},
                             std::pair{"musique_policy", &scfg.musique_policy}}) {
    std::string name;
    rd.read(sy, key, "synthesis.", name);
    if (name.empty()) continue;
    if (auto p = synth::parse_nli_policy(name)) {
      *target = *p;
    } else {
      v.push_back(std::string("synthesis.") + key + ": unknown policy '" + name + "'");
    }
  }
  rd.read(sy, "musique_hops", "synthesis.", scfg.musique_hops);
  rd.read(sy, "include_hotpotqa", "synthesis.", scfg.include_hotpotqa);
  rd.read(sy, "include_musique", "synthesis.", scfg.include_musique);

  auto e = detail::section(root, "eval", v);
  rd.read(e, "budget_tokens", "eval.", c.eval.budget_tokens);
  rd.read(e, "grid_step", "eval.", c.eval.grid_step);
  if (e["fixed_threshold"] && !e["fixed_threshold"].IsNull()) {
    double t = 0.5;
    const auto& node = e["fixed_threshold"];
    try {
      if (node.as<std::string>() == "true") {
        c.eval.fixed_threshold = 0.5;
      } else if (node.as<std::string>() != "false") {
        t = node.as<double>();
        c.eval.fixed_threshold = t;
      }
    } catch (const YAML::Exception&) {
      v.push_back("eval.fixed_threshold: expected a boolean or a number");
    }
  }

  auto h = detail::section(root, "hopscan", v);
  rd.read(h, "sample_size", "hopscan.", c.hopscan.sample_size);

  // Invariants.
  if (c.backend.kind != "mock" && c.backend.kind != "http") {
    v.push_back("backend.kind must be mock or http");
  }
  if (c.backend.kind == "http" && c.backend.endpoint.empty()) {
    v.push_back("backend.endpoint is required for the http backend");
  }
  if (c.backend.max_in_flight < 1) v.push_back("backend.max_in_flight must be >= 1");
  if (c.backend.max_tokens < 1) v.push_back("backend.max_tokens must be >= 1");
  if (c.backend.temperature < 0.0) v.push_back("backend.temperature must be >= 0");
  if (c.scorer.kind != "mock" && c.scorer.kind != "http") v.push_back("scorer.kind must be mock or http");
  if (c.scorer.kind == "http" && c.scorer.endpoint.empty()) {
    v.push_back("scorer.endpoint is required for the http scorer");
  }
  if (c.scorer.max_batch < 1) v.push_back("scorer.max_batch must be >= 1");
  if (c.delimiters.tuple.empty() || c.delimiters.group.empty() ||
      c.delimiters.tuple == c.delimiters.group) {
    v.push_back("delimiters must be non-empty and distinct");
  }
  if (scfg.hops.empty()) v.push_back("synthesis.hops must not be empty");
  for (int hop : scfg.hops) {
    if (hop < 1) {
      v.push_back("hops must be \xE2\x89\xA5 1");
      break;
    }
  }
  for (int hop : scfg.musique_hops) {
    if (hop < 1) {
      v.push_back("synthesis.musique_hops must be \xE2\x89\xA5 1");
      break;
    }
  }
  if (scfg.shapes.empty()) v.push_back("synthesis.shapes must not be empty");
  if (!(scfg.corrupt_fraction >= 0.0 && scfg.corrupt_fraction < 1.0)) {
    v.push_back("synthesis.corrupt_fraction must be in [0, 1)");
  }
  if (c.eval.budget_tokens < 1) v.push_back("eval.budget_tokens must be >= 1");
  if (!(c.eval.grid_step > 0.0 && c.eval.grid_step <= 1.0)) v.push_back("eval.grid_step must be in (0, 1]");
  if (c.eval.fixed_threshold && !(*c.eval.fixed_threshold >= 0.0 && *c.eval.fixed_threshold <= 1.0)) {
    v.push_back("eval.fixed_threshold must be in [0, 1]");
  }
  if (c.workers < 1) v.push_back("workers must be >= 1");

  // Referenced paths must exist.
  c.prompts_dir = detail::resolve(base, c.prompts_dir).string();
  if (!fs::is_directory(c.prompts_dir)) v.push_back("prompts_dir does not exist: " + c.prompts_dir);
  if (!c.backend.fixtures.empty()) {
    c.backend.fixtures = detail::resolve(base, c.backend.fixtures).string();
    if (!fs::is_regular_file(c.backend.fixtures)) {
      v.push_back("backend.fixtures does not exist: " + c.backend.fixtures);
    }
  }
  if (!c.backend.cache_dir.empty()) {
    c.backend.cache_dir = detail::resolve(base, c.backend.cache_dir).string();
    auto parent = fs::path(c.backend.cache_dir).parent_path();
    if (!parent.empty() && !fs::is_directory(parent)) {
      v.push_back("backend.cache_dir parent does not exist: " + parent.string());
    }
  }

  c.synthesis.seed = c.seeds.synthesis;
  c.synthesis.workers = c.workers;
  if (v.empty()) res.config = std::move(c);
  return res;
}

// Parses and decodes a config file; an unparseable file is one violation.
inline ConfigResult validate_config(const fs::path& path, std::span<const std::string> overrides = {}) {
  ConfigResult res;
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    res.violations.push_back("cannot read config file " + path.string());
    return res;
  } catch (const YAML::Exception& e) {
    res.violations.push_back("config parse error: " + std::string(e.what()));
    return res;
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  try {
    for (const auto& o : overrides) apply_override(root, o);
  } catch (const Error& e) {
    res.violations.push_back(e.what());
    return res;
  }
  return decode_config(root, path.parent_path());
}

inline nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json shapes = nlohmann::json::array();
  for (auto s : c.synthesis.shapes) shapes.push_back(graph::to_string(s));
  return {
      {"backend",
       {{"kind", c.backend.kind},
        {"endpoint", c.backend.endpoint},
        {"path", c.backend.path},
        {"model", c.backend.model},
        {"max_in_flight", c.backend.max_in_flight},
        {"api_key_env", c.backend.api_key_env},
        {"fixtures", fs::path(c.backend.fixtures).filename().string()},
        {"temperature", c.backend.temperature},
        {"max_tokens", c.backend.max_tokens}}},
      {"scorer",
       {{"kind", c.scorer.kind}, {"endpoint", c.scorer.endpoint}, {"entail_threshold", c.scorer.entail_threshold}}},
      {"seeds",
       {{"synthesis", c.seeds.synthesis},
        {"hopscan", c.seeds.hopscan},
        {"core", c.seeds.core},
        {"bootstrap", c.seeds.bootstrap}}},
      {"delimiters", {{"tuple", c.delimiters.tuple}, {"group", c.delimiters.group}}},
      {"synthesis",
       {{"hops", c.synthesis.hops},
        {"shapes", shapes},
        {"max_subgraphs_per_doc", c.synthesis.max_subgraphs_per_doc},
        {"corrupt_fraction", c.synthesis.corrupt_fraction},
        {"nli_filter", c.synthesis.nli_filter},
        {"hotpotqa_policy", synth::to_string(c.synthesis.hotpot_policy)},
        {"musique_policy", synth::to_string(c.synthesis.musique_policy)},
        {"musique_hops", c.synthesis.musique_hops},
        {"include_hotpotqa", c.synthesis.include_hotpotqa},
        {"include_musique", c.synthesis.include_musique}}},
      {"eval",
       {{"budget_tokens", c.eval.budget_tokens},
        {"grid_step", c.eval.grid_step},
        {"fixed_threshold", c.eval.fixed_threshold ? nlohmann::json(*c.eval.fixed_threshold)
                                                   : nlohmann::json(nullptr)}}},
      {"hopscan", {{"sample_size", c.hopscan.sample_size}}},
  };
}

// Digest of the effective config. Machine-specific paths and worker counts
// are left out so the digest is stable across checkouts and machines.
inline std::string config_digest(const PipelineConfig& c) { return sha256_hex(to_json(c).dump()); }

}  // namespace factcg
