#include <catch_amalgamated.hpp>

#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "factcg/config.hpp"
#include "factcg/io/files.hpp"

using namespace factcg;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kFixtures = FACTCG_FIXTURES_DIR;
const std::string kConfig = (kFixtures / "config.yaml").string();

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("factcg-cli-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Run cli(const TempDir& tmp, const std::vector<std::string>& args) {
  std::string cmd = quote(FACTCG_CLI_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  const auto out = tmp / ".stdout", err = tmp / ".stderr";
  cmd += " >" + quote(out) + " 2>" + quote(err);
  int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = io::read_file(out);
  r.err = io::read_file(err);
  fs::remove(out);
  fs::remove(err);
  return r;
}

void write(const std::string& path, const std::string& content) { io::write_file_atomic(path, content); }

bool has_temp_files(const fs::path& dir) {
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename().string().find(".tmp") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("validate_config fills defaults", "[cli][config]") {
  TempDir tmp;
  write(tmp / "min.yaml", "backend:\n  kind: mock\nprompts_dir: " + std::string(FACTCG_PROMPTS_DIR) + "\n");
  auto res = validate_config(tmp / "min.yaml");
  REQUIRE(res.violations.empty());
  const auto& c = *res.config;
  CHECK(c.backend.temperature == 0.0);
  CHECK(c.eval.grid_step == 0.01);
  CHECK(c.eval.budget_tokens == 400);
  CHECK(c.synthesis.hops == std::vector<int>{3, 4});
  CHECK(c.synthesis.corrupt_fraction == 0.18);
  CHECK(c.synthesis.seed == c.seeds.synthesis);
  CHECK_FALSE(c.eval.fixed_threshold);
  CHECK(c.delimiters.tuple == "<|>");
}

TEST_CASE("validate_config reports every violation", "[cli][config]") {
  TempDir tmp;
  write(tmp / "bad.yaml",
        "backend:\n  kind: mock\nprompts_dir: " + std::string(FACTCG_PROMPTS_DIR) +
            "\nsynthesis:\n  hops: [0]\neval:\n  grid_step: 0\n");
  auto res = validate_config(tmp / "bad.yaml");
  CHECK_FALSE(res.config);
  CHECK(res.violations.size() == 2);
  CHECK(std::find(res.violations.begin(), res.violations.end(), "hops must be \xE2\x89\xA5 1") != res.violations.end());
  CHECK(std::find(res.violations.begin(), res.violations.end(), "eval.grid_step must be in (0, 1]") !=
        res.violations.end());

  write(tmp / "paths.yaml", "backend:\n  kind: http\nprompts_dir: nowhere\n");
  auto p = validate_config(tmp / "paths.yaml");
  CHECK(p.violations.size() == 2);

  write(tmp / "broken.yaml", "backend: [unclosed\n");
  auto broken = validate_config(tmp / "broken.yaml");
  REQUIRE(broken.violations.size() == 1);
  CHECK(broken.violations[0].rfind("config parse error", 0) == 0);
}

TEST_CASE("overrides and digest", "[cli][config]") {
  std::vector<std::string> sets = {"synthesis.hops=[3]", "eval.budget_tokens=550"};
  auto res = validate_config(kConfig, sets);
  REQUIRE(res.config);
  CHECK(res.config->synthesis.hops == std::vector<int>{3});
  CHECK(res.config->eval.budget_tokens == 550);
  auto base = validate_config(kConfig);
  CHECK(config_digest(*base.config) != config_digest(*res.config));
  CHECK(config_digest(*base.config) == config_digest(*validate_config(kConfig).config));
  std::vector<std::string> bad = {"no_equals_sign"};
  CHECK_FALSE(validate_config(kConfig, bad).config);
}

TEST_CASE("cli usage errors exit 2 with error json", "[cli]") {
  TempDir tmp;
  auto missing = cli(tmp, {"-c", kConfig, "gen-doc", "-i", tmp / "nope.jsonl", "-o", tmp / "o.jsonl", "-m", tmp / "m.json"});
  CHECK(missing.code == 2);
  auto err = json::parse(missing.err);
  CHECK(err.at("error") == "usage");
  CHECK(err.at("path") == tmp / "nope.jsonl");
  CHECK_FALSE(fs::exists(tmp / "o.jsonl"));

  CHECK(cli(tmp, {"frobnicate"}).code == 2);
  CHECK(cli(tmp, {"-c", tmp / "absent.yaml", "validate-config"}).code == 2);

  auto bad = cli(tmp, {"-c", kConfig, "--set", "synthesis.hops=[0]", "--set", "workers=0", "validate-config"});
  CHECK(bad.code == 2);
  auto bj = json::parse(bad.err);
  CHECK(bj.at("error") == "config");
  CHECK(bj.at("violations").size() == 2);
}

TEST_CASE("cli validate-config prints the effective config", "[cli]") {
  TempDir tmp;
  auto r = cli(tmp, {"-c", kConfig, "validate-config"});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j.at("config").at("eval").at("grid_step") == 0.01);
  CHECK(j.at("config_digest").get<std::string>().size() == 64);
}

TEST_CASE("cli gen-doc and gen-mhqa are byte-identical across runs", "[cli][determinism]") {
  TempDir tmp;
  for (int run = 0; run < 2; ++run) {
    const std::string tag = std::to_string(run);
    REQUIRE(cli(tmp, {"-c", kConfig, "gen-doc", "-i", (kFixtures / "docs20.jsonl").string(), "-o",
                      tmp / ("doc" + tag + ".jsonl"), "-m", tmp / ("doc" + tag + ".json")})
                .code == 0);
    REQUIRE(cli(tmp, {"-c", kConfig, "gen-mhqa", "-i", (kFixtures / "mhqa30.jsonl").string(), "-o",
                      tmp / ("mhqa" + tag + ".jsonl"), "-m", tmp / ("mhqa" + tag + ".json")})
                .code == 0);
  }
  for (const auto& name : {"doc", "mhqa"}) {
    CHECK(io::read_file(tmp / (std::string(name) + "0.jsonl")) == io::read_file(tmp / (std::string(name) + "1.jsonl")));
    CHECK(io::read_file(tmp / (std::string(name) + "0.json")) == io::read_file(tmp / (std::string(name) + "1.json")));
  }
  auto m = json::parse(io::read_file(tmp / "doc0.json"));
  CHECK(m.at("command") == "gen-doc");
  CHECK(m.at("seed") == 13);
  CHECK(m.at("counts").at("cg2c_doc").at("positive") == m.at("counts").at("cg2c_doc").at("negative"));
  CHECK_FALSE(has_temp_files(tmp.path));
}

TEST_CASE("cli eval with a fixed threshold", "[cli][eval]") {
  TempDir tmp;
  write(tmp / "bench.jsonl",
        "{\"id\":\"a\",\"dataset\":\"d1\",\"doc\":\"Ann met Bob in Rome.\",\"claim\":\"Ann met Bob.\",\"label\":1}\n"
        "{\"id\":\"b\",\"dataset\":\"d1\",\"doc\":\"Ann met Bob in Rome.\",\"claim\":\"Cy saw Dee.\",\"label\":0}\n"
        "{\"id\":\"c\",\"dataset\":\"d1\",\"doc\":\"Eve lives in Oslo.\",\"claim\":\"Eve lives in Paris.\",\"label\":0}\n"
        "{\"id\":\"d\",\"dataset\":\"d2\",\"doc\":\"Eve lives in Oslo.\",\"claim\":\"Eve lives in Oslo.\",\"label\":1}\n"
        "{\"id\":\"e\",\"dataset\":\"d2\",\"doc\":\"Eve lives in Oslo.\",\"claim\":\"Max owns Lyon.\",\"label\":0}\n");
  auto r = cli(tmp, {"-c", kConfig, "eval", "-i", tmp / "bench.jsonl", "-o", tmp / "report.json", "--scores",
                     tmp / "scores.jsonl", "--fixed-threshold", "0.5"});
  REQUIRE(r.code == 0);
  auto rep = json::parse(io::read_file(tmp / "report.json"));
  REQUIRE(rep.at("reports").size() == 2);
  for (const auto& d : rep.at("reports")) {
    CHECK(d.at("threshold") == 0.5);
    CHECK(d.at("threshold_source") == "fixed");
  }
  CHECK(rep.at("reports")[0].at("bacc") == 0.75);
  CHECK(rep.at("reports")[1].at("bacc") == 1.0);

  auto tuned = cli(tmp, {"-c", kConfig, "tune-threshold", "-i", tmp / "scores.jsonl", "-o", tmp / "tuned.json"});
  REQUIRE(tuned.code == 0);
  auto t = json::parse(io::read_file(tmp / "tuned.json"));
  CHECK(t.at("d1").at("bacc") == 1.0);
  CHECK(t.at("d1").at("threshold") == 0.67);

  // A malformed row is a runtime error and writes nothing.
  write(tmp / "broken.jsonl", "{\"id\":\"a\",\"doc\":\"x.\",\"claim\":\"y\"}\n");
  auto broken = cli(tmp, {"-c", kConfig, "eval", "-i", tmp / "broken.jsonl", "-o", tmp / "r2.json", "--scores",
                          tmp / "s2.jsonl"});
  CHECK(broken.code == 1);
  CHECK_FALSE(fs::exists(tmp / "r2.json"));
  CHECK_FALSE(fs::exists(tmp / "s2.jsonl"));
}

TEST_CASE("cli hopscan, core and bootstrap commands", "[cli]") {
  TempDir tmp;
  auto hs = cli(tmp, {"-c", kConfig, "hopscan", "-i", (kFixtures / "hopscan_claims.jsonl").string(), "-o",
                      tmp / "hops.json", "--table", tmp / "hops.txt"});
  REQUIRE(hs.code == 0);
  auto h = json::parse(io::read_file(tmp / "hops.json"));
  CHECK(h.at("buckets") == json{{"1", 2}, {"2", 1}, {"3", 1}, {"4", 1}, {">=5", 1}});
  CHECK(io::read_file(tmp / "hops.txt").find("2-hop") != std::string::npos);

  write(tmp / "wice.jsonl",
        "{\"doc_id\":\"w1\",\"sentences\":[\"A.\",\"B.\",\"C.\"],\"claim\":\"c\",\"evidence_sets\":[[0,1],[1,2]]}\n"
        "{\"doc_id\":\"w2\",\"sentences\":[\"A.\"],\"claim\":\"c\",\"evidence_sets\":[[0]]}\n");
  REQUIRE(cli(tmp, {"-c", kConfig, "core-build", "-i", tmp / "wice.jsonl", "-o", tmp / "core.jsonl", "-m",
                    tmp / "core.json"})
              .code == 0);
  auto cm = json::parse(io::read_file(tmp / "core.json"));
  CHECK(cm.at("pairs") == 1);
  CHECK(cm.at("skipped").at("small_evidence") == 1);
  auto ce = cli(tmp, {"-c", kConfig, "core-eval", "-i", tmp / "core.jsonl", "-o", tmp / "core_eval.json",
                      "--threshold", "0.5"});
  REQUIRE(ce.code == 0);
  CHECK(json::parse(io::read_file(tmp / "core_eval.json")).contains("accuracy"));

  std::string a, b;
  for (int i = 0; i < 40; ++i) {
    const int label = i % 2;
    const std::string head = "{\"id\":\"" + std::to_string(i) + "\",\"dataset\":\"d\",\"label\":" + std::to_string(label);
    a += head + ",\"score\":" + (label ? "0.9" : "0.1") + "}\n";
    b += head + ",\"score\":" + (label ? "0.1" : "0.9") + "}\n";
  }
  write(tmp / "a.jsonl", a);
  write(tmp / "b.jsonl", b);
  auto boot = cli(tmp, {"-c", kConfig, "bootstrap-test", "--a", tmp / "a.jsonl", "--b", tmp / "b.jsonl",
                        "--threshold-a", "0.5", "--threshold-b", "0.5", "--runs", "100", "--sample-size", "150"});
  REQUIRE(boot.code == 0);
  auto bj = json::parse(boot.out);
  CHECK(bj.at("p_value") == 1.0 / 101.0);
  CHECK(bj.at("runs_used") == 100);
}
