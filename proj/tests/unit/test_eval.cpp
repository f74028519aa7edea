#include <catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "../support/oracles.hpp"
#include "factcg/eval/bootstrap.hpp"
#include "factcg/eval/chunk.hpp"
#include "factcg/eval/core.hpp"
#include "factcg/eval/metrics.hpp"
#include "factcg/eval/scorer.hpp"
#include "factcg/eval/sentences.hpp"

using namespace factcg;
using namespace factcg::eval;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a factcg::Error");
  return ErrorKind::kData;
}

// Score depends on which marker word the chunk holds.
class MarkerScorer final : public Scorer {
 public:
  std::map<std::string, double> table;
  bool throw_on_call = false;
  std::string name() const override { return "marker"; }
  double score(std::string_view doc, std::string_view) override {
    if (throw_on_call) throw std::runtime_error("model crashed");
    double best = 0.0;
    for (const auto& [word, s] : table) {
      if (doc.find(word) != std::string_view::npos) best = std::max(best, s);
    }
    return best;
  }
};

ConfusionCounts cc(std::size_t tp, std::size_t fn, std::size_t tn, std::size_t fp) { return {tp, fn, tn, fp}; }

}  // namespace

TEST_CASE("sentence splitter", "[eval][sentences]") {
  using V = std::vector<std::string>;
  CHECK(split_sentences("One. Two! Three?") == V{"One.", "Two!", "Three?"});
  CHECK(split_sentences("Dr. Smith met Mr. Jones. They talked.") == V{"Dr. Smith met Mr. Jones.", "They talked."});
  CHECK(split_sentences("J. R. R. Tolkien wrote it. Yes.") == V{"J. R. R. Tolkien wrote it.", "Yes."});
  CHECK(split_sentences("He said \"stop.\" Then left.") == V{"He said \"stop.\"", "Then left."});
  CHECK(split_sentences("Pi is 3.14 today. Ok.") == V{"Pi is 3.14 today.", "Ok."});
  CHECK(split_sentences("It was late. and then more.") == V{"It was late. and then more."});
  CHECK(split_sentences("Title line\n\nBody starts here. End") == V{"Title line", "Body starts here.", "End"});
  CHECK(split_sentences("Wait... What?! (Really.) Fine.") == V{"Wait...", "What?!", "(Really.)", "Fine."});
  CHECK(split_sentences("  \n ").empty());
}

TEST_CASE("chunker packs greedily", "[eval][chunk]") {
  std::map<std::string, std::size_t> tokens = {{"s1", 300}, {"s2", 200}, {"s3", 100}, {"big", 600}};
  TokenCounter count = [&](std::string_view s) { return tokens.at(std::string(s)); };

  auto c = chunk_sentences({"s1", "s2", "s3"}, 400, count);
  REQUIRE(c.size() == 2);
  CHECK(c[0].text == "s1");
  CHECK(c[1].text == "s2 s3");
  CHECK(c[1].first_sentence == 1);
  CHECK(c[1].sentence_count == 2);
  CHECK(c[1].tokens == 300);

  auto big = chunk_sentences({"big"}, 400, count);
  REQUIRE(big.size() == 1);
  CHECK(big[0].tokens == 600);

  auto fit = chunk_sentences({"s2", "s3"}, 400, count);
  CHECK(fit.size() == 1);

  auto around = chunk_sentences({"s3", "big", "s3"}, 400, count);
  REQUIRE(around.size() == 3);
  CHECK(around[1].text == "big");

  CHECK(kind_of([&] { chunk_sentences({"s1"}, 0, count); }) == ErrorKind::kContractViolation);
  CHECK(kind_of([] { chunk_document(" \n", 400, text::whitespace_token_count); }) == ErrorKind::kEmptyDocument);
}

TEST_CASE("score_pair takes the chunk maximum", "[eval][chunk]") {
  MarkerScorer s;
  s.table = {{"alpha", 0.3}, {"beta", 0.9}, {"gamma", 0.5}};
  TokenCounter one = [](std::string_view) { return std::size_t{1}; };
  CHECK(score_pair(s, "alpha one. beta two. gamma three.", "c", 1, one) == 0.9);
  CHECK(score_pair(s, "alpha one. gamma three.", "c", 100, one) == 0.5);
  s.throw_on_call = true;
  CHECK(kind_of([&] { score_pair(s, "alpha one.", "c", 1, one); }) == ErrorKind::kScoringFailed);
}

TEST_CASE("overlap scorer", "[eval][scorer]") {
  OverlapScorer s;
  CHECK(s.score("Paris is the capital of France.", "The capital of France is Paris") == 1.0);
  CHECK(s.score("Paris is in France.", "Paris borders Spain") == Catch::Approx(1.0 / 3));
  CHECK(s.score("anything", "the of") == 0.0);
  CHECK(s.nli_label("Ann met Bob.", "Ann met Bob") == NliLabel::kEntailment);
  CHECK(s.nli_label("Ann met Bob.", "Ann met Cy") == NliLabel::kNeutral);
}

TEST_CASE("chunker on the fixture corpus", "[eval][chunk][property]") {
  std::ifstream in(std::filesystem::path(FACTCG_FIXTURES_DIR) / "chunk_docs50.jsonl");
  std::string line;
  OverlapScorer scorer;
  int docs = 0;
  for (std::size_t budget : {20u, 60u, 400u}) {
    in.clear();
    in.seekg(0);
    while (std::getline(in, line)) {
      auto j = nlohmann::json::parse(line);
      const std::string doc = j.at("doc"), claim = j.at("claim");
      auto sentences = split_sentences(doc);
      auto chunks = chunk_document(doc, budget, text::whitespace_token_count);
      std::vector<std::string> rebuilt;
      double expected = 0.0;
      for (const auto& c : chunks) {
        CHECK((c.tokens <= budget || c.sentence_count == 1));
        rebuilt.push_back(c.text);
        expected = std::max(expected, scorer.score(c.text, claim));
      }
      CHECK(text::join(rebuilt, " ") == text::join(sentences, " "));
      CHECK(score_pair(scorer, doc, claim, budget) == expected);
      ++docs;
    }
  }
  CHECK(docs == 150);
}

TEST_CASE("balanced accuracy examples", "[eval][bacc]") {
  CHECK(balanced_accuracy(cc(3, 1, 2, 2)) == 0.625);
  CHECK(balanced_accuracy(cc(5, 0, 7, 0)) == 1.0);
  CHECK(balanced_accuracy(cc(0, 4, 4, 0)) == 0.5);
  CHECK(balanced_accuracy(cc(0, 5, 0, 5)) == 0.0);
  CHECK(balanced_accuracy(cc(4, 0, 0, 4)) == 0.5);
  CHECK(balanced_accuracy(cc(1, 1, 1, 1)) == 0.5);
  CHECK(balanced_accuracy(cc(9, 1, 1, 9)) == 0.5);
  CHECK(balanced_accuracy(cc(1, 3, 3, 1)) == 0.5);
  CHECK(balanced_accuracy(cc(2, 2, 3, 1)) == 0.625);
  CHECK(balanced_accuracy(cc(1, 0, 1, 3)) == 0.625);
  CHECK(balanced_accuracy(cc(90, 10, 1, 0)) == 0.95);
  CHECK(kind_of([] { balanced_accuracy(cc(0, 0, 3, 1)); }) == ErrorKind::kDegenerateClassBalance);
  CHECK(kind_of([] { balanced_accuracy(cc(2, 1, 0, 0)); }) == ErrorKind::kDegenerateClassBalance);
}

TEST_CASE("confusion and fixed threshold evaluation", "[eval][bacc]") {
  std::vector<double> s = {0.5, 0.49, 0.9, 0.1};
  std::vector<int> l = {1, 1, 0, 0};
  CHECK(confusion_at(s, l, 0.5) == cc(1, 1, 1, 1));
  auto r = evaluate_at(s, l, 0.5);
  CHECK(r.threshold == 0.5);
  CHECK(r.bacc == 0.5);
  std::vector<int> short_labels = {1};
  CHECK(kind_of([&] { confusion_at(s, short_labels, 0.5); }) == ErrorKind::kContractViolation);
}

TEST_CASE("identical predictions give identical BAcc", "[eval][bacc][property]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<double> s(30), warped(30);
    std::vector<int> l(30);
    for (int i = 0; i < 30; ++i) {
      s[i] = u(rng);
      l[i] = i % 3 == 0;
      warped[i] = s[i] >= 0.5 ? 0.5 + (s[i] - 0.5) * 0.1 : s[i] * s[i];
    }
    CHECK(evaluate_at(s, l, 0.5).bacc == evaluate_at(warped, l, 0.5).bacc);
  }
}

TEST_CASE("threshold tuner examples", "[eval][tune]") {
  std::vector<double> s = {0.2, 0.4, 0.6, 0.8};
  auto r = tune_threshold(s, std::vector<int>{0, 0, 1, 1});
  CHECK(r.threshold == 0.41);
  CHECK(r.bacc == 1.0);

  std::vector<double> flat = {0.7, 0.7, 0.7};
  auto f = tune_threshold(flat, std::vector<int>{1, 0, 1});
  CHECK(f.threshold == 0.0);
  CHECK(f.bacc == 0.5);

  auto inv = tune_threshold(s, std::vector<int>{1, 1, 0, 0});
  CHECK(inv.threshold == 0.0);
  CHECK(inv.bacc == 0.5);

  CHECK(kind_of([&] { tune_threshold(s, std::vector<int>{1, 1, 1, 1}); }) == ErrorKind::kDegenerateClassBalance);
  CHECK(kind_of([&] { tune_threshold(s, std::vector<int>{0, 1, 1, 1}, 0.3); }) == ErrorKind::kContractViolation);
  CHECK(tune_threshold(s, std::vector<int>{0, 0, 1, 1}, 0.1).threshold == Catch::Approx(0.5));
}

TEST_CASE("threshold tuner matches an exhaustive scan", "[eval][tune][property]") {
  std::mt19937_64 rng(2025);
  for (int iter = 0; iter < 200; ++iter) {
    std::uniform_int_distribution<int> n_dist(2, 60);
    const int n = n_dist(rng);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    std::bernoulli_distribution coin(0.5), grid(0.3);
    std::uniform_int_distribution<int> cents(0, 100);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < n; ++i) {
      scores[i] = grid(rng) ? cents(rng) / 100.0 : u(rng);
      labels[i] = coin(rng);
    }
    labels[0] = 1;
    labels[1] = 0;
    auto got = tune_threshold(scores, labels);
    auto want = oracle::exhaustive_scan(scores, labels);
    CHECK(got.bacc == Catch::Approx(want.bacc).margin(1e-12));
    CHECK(got.threshold == want.index / 100.0);
  }
}

TEST_CASE("core_metrics examples", "[eval][core]") {
  std::vector<std::pair<double, double>> pairs = {{0.9, 0.2}, {0.8, 0.7}, {0.6, 0.4}, {0.3, 0.1}};
  auto m = core_metrics(pairs, 0.5);
  CHECK(m.accuracy == 0.5);
  REQUIRE(m.precision);
  CHECK(*m.precision == 2.0 / 3.0);
  CHECK(m.connected == 2);
  CHECK(m.predicted_positive == 3);

  std::vector<std::pair<double, double>> perfect = {{0.9, 0.1}, {0.6, 0.0}};
  auto p = core_metrics(perfect, 0.5);
  CHECK(p.accuracy == 1.0);
  CHECK(p.precision == 1.0);

  std::vector<std::pair<double, double>> none = {{0.1, 0.0}};
  auto z = core_metrics(none, 0.5);
  CHECK(z.accuracy == 0.0);
  CHECK_FALSE(z.precision);

  CHECK(kind_of([] { core_metrics({}, 0.5); }) == ErrorKind::kPrecondition);
  CHECK(kind_of([&] { core_metrics(pairs, 1.5); }) == ErrorKind::kPrecondition);
}

TEST_CASE("core_metrics bounds", "[eval][core][property]") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<std::pair<double, double>> ps(20);
    for (auto& p : ps) p = {u(rng), u(rng)};
    const double theta = u(rng);
    auto m = core_metrics(ps, theta);
    CHECK(m.accuracy >= 0.0);
    CHECK(m.accuracy <= 1.0);
    if (m.precision) {
      CHECK(m.accuracy <= *m.precision);
      CHECK(m.accuracy == Catch::Approx(*m.precision * m.predicted_positive / 20.0));
    }
  }
}

TEST_CASE("build_core_dataset worked examples", "[eval][core]") {
  EvidenceRecord overlap{"d", {"s1.", "s2.", "s3."}, "c", {{0, 1}, {1, 2}}, 1};
  bool saw_middle_only = false;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto r = build_core_dataset(std::span(&overlap, 1), seed);
    REQUIRE(r.pairs.size() == 1);
    const auto& removed = r.pairs[0].removed;
    CHECK(hits_every_set(overlap.evidence_sets, removed));
    if (removed == std::vector<std::size_t>{1}) {
      saw_middle_only = true;
      CHECK(r.pairs[0].negative_doc == "s1. s3.");
    }
  }
  CHECK(saw_middle_only);

  EvidenceRecord disjoint{"d", {"a.", "b.", "c.", "d."}, "c", {{0, 1}, {2, 3}}, 1};
  auto r = build_core_dataset(std::span(&disjoint, 1), 3);
  REQUIRE(r.pairs.size() == 1);
  const auto& rm = r.pairs[0].removed;
  REQUIRE(rm.size() == 2);
  CHECK(rm[0] <= 1);
  CHECK(rm[1] >= 2);

  std::vector<EvidenceRecord> skipped = {
      {"small", {"a.", "b."}, "c", {{0}, {0, 1}}, 1},
      {"bad", {"a."}, "c", {{0, 4}}, 1},
      {"empty", {"a.", "b."}, "c", {}, 1},
      {"neg", {"a.", "b."}, "c", {{0, 1}}, 0},
  };
  auto s = build_core_dataset(skipped, 0);
  CHECK(s.pairs.empty());
  CHECK(s.skipped_small_evidence == 1);
  CHECK(s.skipped_invalid == 2);
  CHECK(s.skipped_negative == 1);
}

TEST_CASE("build_core_dataset hitting-set invariant", "[eval][core][property]") {
  std::mt19937_64 rng(41);
  std::vector<EvidenceRecord> records;
  for (int i = 0; i < 100; ++i) {
    std::uniform_int_distribution<int> n_sent(3, 12), n_sets(1, 4);
    EvidenceRecord r;
    r.doc_id = "wice-" + std::to_string(i);
    r.claim = "claim " + std::to_string(i);
    const int n = n_sent(rng);
    for (int k = 0; k < n; ++k) r.sentences.push_back("Sentence " + std::to_string(k) + " of " + r.doc_id + ".");
    const int sets = n_sets(rng);
    for (int k = 0; k < sets; ++k) {
      std::vector<std::size_t> all(n);
      std::iota(all.begin(), all.end(), 0);
      std::shuffle(all.begin(), all.end(), rng);
      std::uniform_int_distribution<int> size(2, std::min(n, 4));
      all.resize(size(rng));
      std::sort(all.begin(), all.end());
      r.evidence_sets.push_back(all);
    }
    records.push_back(r);
  }
  auto out = build_core_dataset(records, 11);
  REQUIRE(out.pairs.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) {
    const auto& rec = records[i];
    const auto& p = out.pairs[i];
    std::set<std::size_t> removed(p.removed.begin(), p.removed.end());
    for (const auto& e : rec.evidence_sets) {
      std::vector<std::size_t> inter;
      std::set_intersection(e.begin(), e.end(), removed.begin(), removed.end(), std::back_inserter(inter));
      CHECK_FALSE(inter.empty());
    }
    std::string neg;
    for (std::size_t k = 0; k < rec.sentences.size(); ++k) {
      if (removed.count(k)) continue;
      if (!neg.empty()) neg += " ";
      neg += rec.sentences[k];
    }
    CHECK(p.negative_doc == neg);
    CHECK(p.positive_doc == text::join(rec.sentences, " "));
  }
  auto again = build_core_dataset(records, 11);
  for (std::size_t i = 0; i < 100; ++i) CHECK(again.pairs[i].removed == out.pairs[i].removed);
}

TEST_CASE("evidence record json", "[eval][core]") {
  auto r = evidence_from_json(nlohmann::json::parse(
      R"({"doc_id":"w1","sentences":["a.","b."],"claim":"c","evidence_sets":[[0,1]]})"));
  CHECK(r.label == 1);
  CHECK(evidence_from_json(to_json(r)).evidence_sets == r.evidence_sets);
  CHECK(kind_of([] { evidence_from_json(nlohmann::json::parse(R"({"doc_id":"w1"})")); }) == ErrorKind::kData);
}

TEST_CASE("paired bootstrap", "[eval][bootstrap]") {
  std::vector<int> labels;
  std::vector<double> good, bad, noisy;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    int l = i % 2;
    labels.push_back(l);
    good.push_back(l ? 0.9 : 0.1);
    bad.push_back(l ? 0.1 : 0.9);
    noisy.push_back(u(rng) < 0.8 ? good.back() : bad.back());
  }
  BootstrapOptions opt{100, 150, 42, 20};

  auto same = paired_bootstrap(noisy, noisy, labels, 0.5, 0.5, opt);
  CHECK(same.p_value >= 0.99);

  auto dom = paired_bootstrap(good, bad, labels, 0.5, 0.5, opt);
  CHECK(dom.runs_used == 100);
  CHECK(dom.p_value == 1.0 / 101.0);

  auto strong = paired_bootstrap(good, noisy, labels, 0.5, 0.5, opt);
  CHECK(strong.p_value <= 0.02);
  CHECK(strong.mean_delta > 0);

  auto again = paired_bootstrap(good, noisy, labels, 0.5, 0.5, opt);
  CHECK(again.p_value == strong.p_value);
  CHECK(again.mean_delta == strong.mean_delta);

  CHECK(kind_of([&] { paired_bootstrap(good, bad, std::vector<int>(200, 1), 0.5, 0.5, opt); }) ==
        ErrorKind::kDegenerateClassBalance);
}

TEST_CASE("bootstrap skips runs that cannot draw both classes", "[eval][bootstrap]") {
  // One positive in 1000 items with a resample of 2: almost every draw misses it.
  std::vector<int> labels(1000, 0);
  labels[0] = 1;
  std::vector<double> s(1000, 0.0);
  s[0] = 1.0;
  auto r = paired_bootstrap(s, s, labels, 0.5, 0.5, BootstrapOptions{10, 2, 1, 0});
  CHECK(r.runs_skipped + r.runs_used == 10);
  CHECK(r.runs_skipped >= 9);
  CHECK(r.p_value == static_cast<double>(r.a_not_better + 1) / (r.runs_used + 1));
}
