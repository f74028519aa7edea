// factcg command-line driver.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "factcg/config.hpp"
#include "factcg/eval/bootstrap.hpp"
#include "factcg/eval/chunk.hpp"
#include "factcg/eval/core.hpp"
#include "factcg/eval/http_scorer.hpp"
#include "factcg/eval/metrics.hpp"
#include "factcg/graph/json.hpp"
#include "factcg/hopscan.hpp"
#include "factcg/io/files.hpp"
#include "factcg/llm/http_backend.hpp"
#include "factcg/llm/mock_backend.hpp"
#include "factcg/llm/prompting.hpp"
#include "factcg/synth/pipeline.hpp"

#ifndef FACTCG_DEFAULT_PROMPTS_DIR
#define FACTCG_DEFAULT_PROMPTS_DIR "prompts"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace factcg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Usage and config problems: exit code 2.
struct UsageError : std::runtime_error {
  UsageError(const std::string& msg, std::string p = {}) : std::runtime_error(msg), path(std::move(p)) {}
  std::string path;
};

int report_error(std::string_view kind, const std::string& message, const std::string& path = {},
                 const std::vector<std::string>& violations = {}) {
  json err = {{"error", kind}, {"message", message}};
  if (!path.empty()) err["path"] = path;
  if (!violations.empty()) err["violations"] = violations;
  std::cerr << err.dump() << "\n";
  return kind == "usage" || kind == "config" ? kExitUsage : kExitRuntime;
}

void need_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw UsageError("input not found: " + path, path);
}

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
};

PipelineConfig load(const Common& common) {
  YAML::Node root(YAML::NodeType::Map);
  fs::path base;
  if (!common.config_path.empty()) {
    need_file(common.config_path);
    try {
      root = YAML::LoadFile(common.config_path);
    } catch (const YAML::Exception& e) {
      throw UsageError("config parse error: " + std::string(e.what()), common.config_path);
    }
    if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    base = fs::path(common.config_path).parent_path();
  }
  if (root.IsMap() && !root["prompts_dir"]) root["prompts_dir"] = std::string(FACTCG_DEFAULT_PROMPTS_DIR);
  std::vector<std::string> violations;
  for (const auto& o : common.overrides) {
    try {
      apply_override(root, o);
    } catch (const Error& e) {
      violations.push_back(e.what());
    }
  }
  auto res = decode_config(root, base);
  violations.insert(violations.end(), res.violations.begin(), res.violations.end());
  if (!violations.empty()) {
    std::exit(report_error("config", "invalid configuration", common.config_path, violations));
  }
  return *res.config;
}

// Backend, cache, templates and prompt client for one run.
struct Llm {
  std::unique_ptr<llm::Gateway> gateway;
  std::optional<prompt::TemplateRegistry> templates;
  std::unique_ptr<llm::PromptClient> client;
};

std::unique_ptr<Llm> make_llm(const PipelineConfig& c) {
  auto out = std::make_unique<Llm>();
  std::unique_ptr<llm::Backend> backend;
  if (c.backend.kind == "mock") {
    auto mock = c.backend.fixtures.empty() ? llm::MockBackend()
                                           : llm::MockBackend::from_file(c.backend.fixtures);
    backend = std::make_unique<llm::MockBackend>(std::move(mock));
  } else {
    llm::HttpBackendOptions opt;
    opt.endpoint = c.backend.endpoint;
    opt.path = c.backend.path;
    opt.auth_header = c.backend.auth_header;
    opt.auth_prefix = c.backend.auth_prefix;
    opt.timeout_seconds = c.backend.timeout_seconds;
    if (const char* key = std::getenv(c.backend.api_key_env.c_str())) opt.api_key = key;
    backend = std::make_unique<llm::HttpBackend>(std::move(opt));
  }
  std::unique_ptr<llm::CompletionCache> cache;
  if (!c.backend.cache_dir.empty()) {
    cache = std::make_unique<llm::DirectoryCache>(c.backend.cache_dir);
  } else {
    cache = std::make_unique<llm::MemoryCache>();
  }
  out->gateway = std::make_unique<llm::Gateway>(std::move(backend), std::move(cache), llm::RetryPolicy{},
                                                c.backend.max_in_flight);
  out->templates = prompt::TemplateRegistry::load(c.prompts_dir, c.delimiters);
  out->client = std::make_unique<llm::PromptClient>(
      *out->gateway, *out->templates,
      llm::ModelParams{c.backend.model, c.backend.temperature, c.backend.max_tokens});
  return out;
}

std::unique_ptr<eval::Scorer> make_scorer(const PipelineConfig& c) {
  if (c.scorer.kind == "mock") return std::make_unique<eval::OverlapScorer>(c.scorer.entail_threshold);
  eval::HttpScorerOptions opt;
  opt.endpoint = c.scorer.endpoint;
  opt.max_batch = static_cast<std::size_t>(c.scorer.max_batch);
  return std::make_unique<eval::HttpScorer>(std::move(opt));
}

json manifest(const std::string& command, const PipelineConfig& c, std::uint64_t seed,
              const std::string& input, const json& stats) {
  json m = {{"command", command},
            {"seed", seed},
            {"config_digest", config_digest(c)},
            {"input_sha256", sha256_hex(io::read_file(input))}};
  for (const auto& [k, v] : stats.items()) m[k] = v;
  return m;
}

// Per-pair score files: JSONL {id, dataset, label, score}.
struct ScoredItem {
  std::string id;
  std::string dataset;
  int label = 0;
  double score = 0.0;
};

std::vector<ScoredItem> read_scores(const std::string& path) {
  std::vector<ScoredItem> out;
  for (const auto& j : io::read_jsonl(path)) {
    try {
      out.push_back(ScoredItem{j.value("id", std::string{}), j.value("dataset", std::string("default")),
                               j.at("label").get<int>(), j.at("score").get<double>()});
    } catch (const json::exception& e) {
      fail(ErrorKind::kData, path + ": " + e.what());
    }
  }
  return out;
}

json confusion_json(const eval::ConfusionCounts& c) {
  return {{"tp", c.tp}, {"fn", c.fn}, {"tn", c.tn}, {"fp", c.fp}};
}

// ------------------------------------------------------------------ commands

int cmd_validate(const Common& common) {
  auto c = load(common);
  std::cout << io::to_pretty({{"config", to_json(c)}, {"config_digest", config_digest(c)}});
  return kExitOk;
}

int cmd_extract_graph(const Common& common, const std::string& input, const std::string& output) {
  need_file(input);
  auto c = load(common);
  auto llm = make_llm(c);
  std::vector<synth::DocRecord> docs;
  for (const auto& j : io::read_jsonl(input)) docs.push_back(synth::doc_from_json(j));
  std::vector<json> rows(docs.size());
  parallel_for(docs.size(), c.workers, [&](std::size_t i) {
    try {
      auto parsed = llm->client->extract_doc_triples(docs[i].doc);
      rows[i] = graph::to_json(graph::build_graph(parsed.flatten(), docs[i].id));
    } catch (const Error& e) {
      rows[i] = {{"doc_id", docs[i].id}, {"error", to_string(e.kind())}, {"message", e.what()}};
    }
  });
  io::write_file_atomic(output, io::to_jsonl(rows));
  return kExitOk;
}

void write_samples(const std::string& output, const std::vector<synth::SampleRecord>& records) {
  std::vector<json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(synth::to_json(r));
  io::write_file_atomic(output, io::to_jsonl(rows));
}

int cmd_gen_doc(const Common& common, const std::string& input, const std::string& output,
                const std::string& manifest_path) {
  need_file(input);
  auto c = load(common);
  auto llm = make_llm(c);
  std::vector<synth::DocRecord> docs;
  for (const auto& j : io::read_jsonl(input)) docs.push_back(synth::doc_from_json(j));
  auto run = synth::gen_doc_corpus(docs, c.synthesis, *llm->client);
  write_samples(output, run.records);
  io::write_file_atomic(manifest_path, io::to_pretty(manifest("gen-doc", c, c.seeds.synthesis, input, run.stats)));
  return kExitOk;
}

int cmd_gen_mhqa(const Common& common, const std::string& input, const std::string& output,
                 const std::string& manifest_path) {
  need_file(input);
  auto c = load(common);
  auto llm = make_llm(c);
  auto scorer = make_scorer(c);
  std::vector<synth::MhqaRecord> records;
  for (const auto& j : io::read_jsonl(input)) records.push_back(synth::mhqa_from_json(j));
  auto run = synth::gen_mhqa_pairs(records, c.synthesis, *llm->client, scorer.get());
  write_samples(output, run.records);
  io::write_file_atomic(manifest_path,
                        io::to_pretty(manifest("gen-mhqa", c, c.seeds.synthesis, input, run.stats)));
  return kExitOk;
}

int cmd_hopscan(const Common& common, const std::string& input, const std::string& output,
                const std::string& table_path, const std::string& column) {
  need_file(input);
  auto c = load(common);
  auto llm = make_llm(c);
  std::vector<hopscan::ClaimPair> corpus;
  std::size_t skipped_negative = 0;
  for (const auto& j : io::read_jsonl(input)) {
    if (j.value("label", 1) != 1) {
      ++skipped_negative;
      continue;
    }
    try {
      corpus.push_back({j.at("doc").get<std::string>(), j.at("claim").get<std::string>()});
    } catch (const json::exception& e) {
      fail(ErrorKind::kData, input + ": " + e.what());
    }
  }
  hopscan::HopScanOptions opt{c.hopscan.sample_size, c.seeds.hopscan, c.workers};
  auto hist = hopscan::hop_distribution(corpus, *llm->client, opt);
  json out = hist.to_json();
  out["skipped_negative"] = skipped_negative;
  out["seed"] = c.seeds.hopscan;
  out["config_digest"] = config_digest(c);
  const std::string table = hist.table(column);
  io::write_file_atomic(output, io::to_pretty(out));
  if (!table_path.empty()) io::write_file_atomic(table_path, table);
  std::cout << table;
  return kExitOk;
}

int cmd_eval(const Common& common, const std::string& input, const std::string& output,
             const std::string& scores_path, std::optional<double> fixed, const std::string& thresholds_path) {
  need_file(input);
  if (!thresholds_path.empty()) need_file(thresholds_path);
  auto c = load(common);
  if (!fixed && c.eval.fixed_threshold) fixed = c.eval.fixed_threshold;
  auto scorer = make_scorer(c);
  std::map<std::string, double> given;
  if (!thresholds_path.empty()) {
    try {
      given = json::parse(io::read_file(thresholds_path)).get<std::map<std::string, double>>();
    } catch (const json::exception& e) {
      throw UsageError("thresholds file must map dataset names to numbers: " + std::string(e.what()),
                       thresholds_path);
    }
  }

  const auto rows = io::read_jsonl(input);
  std::vector<ScoredItem> items(rows.size());
  const auto counter = eval::token_counter_for(*scorer);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& j = rows[i];
    try {
      items[i].id = j.value("id", std::to_string(i));
      items[i].dataset = j.value("dataset", std::string("default"));
      items[i].label = j.at("label").get<int>();
      items[i].score = eval::score_pair(*scorer, j.at("doc").get<std::string>(),
                                        j.at("claim").get<std::string>(),
                                        static_cast<std::size_t>(c.eval.budget_tokens), counter);
    } catch (const json::exception& e) {
      fail(ErrorKind::kData, input + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }

  std::map<std::string, std::pair<std::vector<double>, std::vector<int>>> by_dataset;
  for (const auto& it : items) {
    by_dataset[it.dataset].first.push_back(it.score);
    by_dataset[it.dataset].second.push_back(it.label);
  }
  json reports = json::array();
  for (const auto& [name, data] : by_dataset) {
    const auto& [scores, labels] = data;
    eval::ThresholdResult r;
    std::string source;
    if (fixed) {
      r = eval::evaluate_at(scores, labels, *fixed);
      source = "fixed";
    } else if (auto g = given.find(name); g != given.end()) {
      r = eval::evaluate_at(scores, labels, g->second);
      source = "given";
    } else {
      r = eval::tune_threshold(scores, labels, c.eval.grid_step);
      source = "tuned";
    }
    reports.push_back({{"dataset", name},
                       {"threshold", r.threshold},
                       {"threshold_source", source},
                       {"bacc", r.bacc},
                       {"confusion", confusion_json(r.counts)},
                       {"per_pair_scores", scores_path},
                       {"pairs", scores.size()}});
  }
  std::vector<json> score_rows;
  for (const auto& it : items) {
    score_rows.push_back({{"id", it.id}, {"dataset", it.dataset}, {"label", it.label}, {"score", it.score}});
  }
  io::write_file_atomic(scores_path, io::to_jsonl(score_rows));
  io::write_file_atomic(output, io::to_pretty({{"scorer", scorer->name()},
                                               {"budget_tokens", c.eval.budget_tokens},
                                               {"reports", reports}}));
  return kExitOk;
}

int cmd_tune(const Common& common, const std::string& input, const std::string& output) {
  need_file(input);
  auto c = load(common);
  std::map<std::string, std::pair<std::vector<double>, std::vector<int>>> by_dataset;
  for (const auto& it : read_scores(input)) {
    by_dataset[it.dataset].first.push_back(it.score);
    by_dataset[it.dataset].second.push_back(it.label);
  }
  json out = json::object();
  for (const auto& [name, data] : by_dataset) {
    auto r = eval::tune_threshold(data.first, data.second, c.eval.grid_step);
    out[name] = {{"threshold", r.threshold}, {"bacc", r.bacc}, {"confusion", confusion_json(r.counts)}};
  }
  io::write_file_atomic(output, io::to_pretty(out));
  return kExitOk;
}

int cmd_core_build(const Common& common, const std::string& input, const std::string& output,
                   const std::string& manifest_path) {
  need_file(input);
  auto c = load(common);
  std::vector<eval::EvidenceRecord> records;
  for (const auto& j : io::read_jsonl(input)) records.push_back(eval::evidence_from_json(j));
  auto built = eval::build_core_dataset(records, c.seeds.core);
  std::vector<json> rows;
  for (const auto& p : built.pairs) rows.push_back(eval::to_json(p));
  io::write_file_atomic(output, io::to_jsonl(rows));
  if (!manifest_path.empty()) {
    json stats = {{"pairs", built.pairs.size()},
                  {"skipped",
                   {{"small_evidence", built.skipped_small_evidence},
                    {"invalid", built.skipped_invalid},
                    {"negative", built.skipped_negative}}}};
    io::write_file_atomic(manifest_path, io::to_pretty(manifest("core-build", c, c.seeds.core, input, stats)));
  }
  return kExitOk;
}

int cmd_core_eval(const Common& common, const std::string& input, const std::string& output,
                  double threshold) {
  need_file(input);
  auto c = load(common);
  auto scorer = make_scorer(c);
  const auto counter = eval::token_counter_for(*scorer);
  const auto budget = static_cast<std::size_t>(c.eval.budget_tokens);
  std::vector<std::pair<double, double>> scores;
  for (const auto& j : io::read_jsonl(input)) {
    auto p = eval::core_pair_from_json(j);
    scores.emplace_back(eval::score_pair(*scorer, p.positive_doc, p.claim, budget, counter),
                        eval::score_pair(*scorer, p.negative_doc, p.claim, budget, counter));
  }
  auto m = eval::core_metrics(scores, threshold);
  io::write_file_atomic(output, io::to_pretty({{"threshold", threshold},
                                               {"accuracy", m.accuracy},
                                               {"precision", m.precision ? json(*m.precision) : json(nullptr)},
                                               {"connected", m.connected},
                                               {"predicted_positive", m.predicted_positive},
                                               {"pairs", m.pairs}}));
  return kExitOk;
}

int cmd_bootstrap(const Common& common, const std::string& a_path, const std::string& b_path,
                  double theta_a, double theta_b, int runs, std::size_t sample_size,
                  std::optional<std::uint64_t> seed, const std::string& output) {
  need_file(a_path);
  need_file(b_path);
  auto c = load(common);
  auto a = read_scores(a_path);
  auto b = read_scores(b_path);
  if (a.size() != b.size()) throw UsageError("score files differ in length", b_path);
  std::vector<double> sa;
  std::vector<double> sb;
  std::vector<int> labels;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].id != b[i].id || a[i].label != b[i].label) {
      throw UsageError("score files are not aligned at line " + std::to_string(i + 1), b_path);
    }
    sa.push_back(a[i].score);
    sb.push_back(b[i].score);
    labels.push_back(a[i].label);
  }
  eval::BootstrapOptions opt;
  opt.runs = runs;
  opt.sample_size = sample_size;
  opt.seed = seed.value_or(c.seeds.bootstrap);
  auto r = eval::paired_bootstrap(sa, sb, labels, theta_a, theta_b, opt);
  json out = {{"p_value", r.p_value},         {"runs", runs},
              {"runs_used", r.runs_used},     {"runs_skipped", r.runs_skipped},
              {"a_not_better", r.a_not_better}, {"mean_delta", r.mean_delta},
              {"sample_size", sample_size},   {"seed", opt.seed}};
  if (output.empty()) {
    std::cout << io::to_pretty(out);
  } else {
    io::write_file_atomic(output, io::to_pretty(out));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"factcg: context-graph claim synthesis and fact-checker evaluation"};
  app.require_subcommand(1);
  Common common;
  app.add_option("-c,--config", common.config_path, "YAML config file");
  app.add_option("--set", common.overrides, "Override a config key, e.g. --set synthesis.hops=[3]");

  std::string input, output, manifest_path, table_path, scores_path, thresholds_path, a_path, b_path;
  std::string column = "Claims";
  std::optional<double> fixed;
  double threshold = 0.0, theta_a = 0.5, theta_b = 0.5;
  int runs = 100;
  std::size_t sample_size = 150;
  std::optional<std::uint64_t> seed;

  auto* validate = app.add_subcommand("validate-config", "Print the effective config or its violations");

  auto* extract = app.add_subcommand("extract-graph", "Documents JSONL to context graph JSONL");
  extract->add_option("-i,--input", input)->required();
  extract->add_option("-o,--output", output)->required();

  auto* gen_doc = app.add_subcommand("gen-doc", "Generate document-only pairs");
  gen_doc->add_option("-i,--input", input)->required();
  gen_doc->add_option("-o,--output", output)->required();
  gen_doc->add_option("-m,--manifest", manifest_path)->required();

  auto* gen_mhqa = app.add_subcommand("gen-mhqa", "Generate pairs from multi-hop QA records");
  gen_mhqa->add_option("-i,--input", input)->required();
  gen_mhqa->add_option("-o,--output", output)->required();
  gen_mhqa->add_option("-m,--manifest", manifest_path)->required();

  auto* hs = app.add_subcommand("hopscan", "Hop distribution of grounded claims");
  hs->add_option("-i,--input", input)->required();
  hs->add_option("-o,--output", output)->required();
  hs->add_option("--table", table_path, "Also write the text table here");
  hs->add_option("--column", column, "Table column header");

  auto* ev = app.add_subcommand("eval", "Score a benchmark file and report balanced accuracy");
  ev->add_option("-i,--input", input)->required();
  ev->add_option("-o,--output", output)->required();
  ev->add_option("--scores", scores_path, "Per-pair score JSONL")->required();
  auto* fixed_opt = ev->add_option("--fixed-threshold", fixed, "Use this threshold, no tuning");
  ev->add_option("--thresholds", thresholds_path, "JSON map of dataset to threshold")->excludes(fixed_opt);

  auto* tune = app.add_subcommand("tune-threshold", "Tune per-dataset thresholds on a score file");
  tune->add_option("-i,--input", input)->required();
  tune->add_option("-o,--output", output)->required();

  auto* core_build = app.add_subcommand("core-build", "Build connected-reasoning pairs");
  core_build->add_option("-i,--input", input)->required();
  core_build->add_option("-o,--output", output)->required();
  core_build->add_option("-m,--manifest", manifest_path);

  auto* core_eval = app.add_subcommand("core-eval", "Connected-reasoning accuracy and precision");
  core_eval->add_option("-i,--input", input)->required();
  core_eval->add_option("-o,--output", output)->required();
  core_eval->add_option("--threshold", threshold)->required();

  auto* boot = app.add_subcommand("bootstrap-test", "Paired bootstrap test of system A over B");
  boot->add_option("--a", a_path, "Scores of system A")->required();
  boot->add_option("--b", b_path, "Scores of system B")->required();
  boot->add_option("--threshold-a", theta_a)->required();
  boot->add_option("--threshold-b", theta_b)->required();
  boot->add_option("--runs", runs);
  boot->add_option("--sample-size", sample_size);
  boot->add_option("--seed", seed);
  boot->add_option("-o,--output", output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what());
  }

  try {
    if (*validate) return cmd_validate(common);
    if (*extract) return cmd_extract_graph(common, input, output);
    if (*gen_doc) return cmd_gen_doc(common, input, output, manifest_path);
    if (*gen_mhqa) return cmd_gen_mhqa(common, input, output, manifest_path);
    if (*hs) return cmd_hopscan(common, input, output, table_path, column);
    if (*ev) return cmd_eval(common, input, output, scores_path, fixed, thresholds_path);
    if (*tune) return cmd_tune(common, input, output);
    if (*core_build) return cmd_core_build(common, input, output, manifest_path);
    if (*core_eval) return cmd_core_eval(common, input, output, threshold);
    if (*boot) return cmd_bootstrap(common, a_path, b_path, theta_a, theta_b, runs, sample_size, seed, output);
  } catch (const UsageError& e) {
    return report_error("usage", e.what(), e.path);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfig) return report_error("config", e.what());
    return report_error(to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return kExitUsage;
}
