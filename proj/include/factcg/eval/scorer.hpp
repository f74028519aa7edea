#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "factcg/error.hpp"
#include "factcg/text.hpp"

namespace factcg::eval {

enum class NliLabel { kEntailment, kContradiction, kNeutral };

constexpr std::string_view to_string(NliLabel l) {
  switch (l) {
    case NliLabel::kEntailment: return "Entailment";
    case NliLabel::kContradiction: return "Contradiction";
    case NliLabel::kNeutral: return "Neutral";
  }
  return "";
}

inline std::optional<NliLabel> parse_nli_label(std::string_view s) {
  if (s == "Entailment") return NliLabel::kEntailment;
  if (s == "Contradiction") return NliLabel::kContradiction;
  if (s == "Neutral") return NliLabel::kNeutral;
  return std::nullopt;
}

struct TextPair {
  std::string doc;
  std::string claim;
};

// Grounded-factuality scorer: confidence in [0,1] that the claim is
// grounded in the doc. NLI labels and tokenizer counts are optional
// capabilities.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::string name() const = 0;
  virtual double score(std::string_view doc, std::string_view claim) = 0;

  virtual std::vector<double> score_batch(std::span<const TextPair> pairs) {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(score(p.doc, p.claim));
    return out;
  }

  virtual std::optional<NliLabel> nli_label(std::string_view /*doc*/, std::string_view /*claim*/) {
    return std::nullopt;
  }

  virtual bool counts_tokens() const { return false; }
  virtual std::size_t token_count(std::string_view text) { return text::whitespace_token_count(text); }
};

namespace detail {

inline std::set<std::string> content_words(std::string_view s) {
  static const std::set<std::string, std::less<>> kStop = {
      "a",  "an",  "and", "are", "as",   "at",   "be",  "by",   "for", "from", "has", "have",
      "he", "her", "his", "in",  "is",   "it",   "its", "of",   "on",  "or",   "she", "that",
      "the", "their", "they", "this", "to", "was", "were", "which", "with", "who"};
  std::set<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && kStop.count(cur) == 0) out.insert(cur);
    cur.clear();
  };
  for (char c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || u >= 0x80) {
      cur.push_back(c);
    } else if (c >= 'A' && c <= 'Z') {
      cur.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

}  // namespace detail

// In-process stand-in for a trained checkpoint: the score is the fraction of
// the claim's content words that occur in the doc. Deterministic; NLI label
// is Entailment at or above `entail_threshold`, Neutral below.
class OverlapScorer final : public Scorer {
 public:
  explicit OverlapScorer(double entail_threshold = 0.9) : entail_threshold_(entail_threshold) {}

  std::string name() const override { return "mock-overlap"; }

  double score(std::string_view doc, std::string_view claim) override {
    auto claim_words = detail::content_words(claim);
    if (claim_words.empty()) return 0.0;
    auto doc_words = detail::content_words(doc);
    std::size_t hit = 0;
    for (const auto& w : claim_words) hit += doc_words.count(w);
    return static_cast<double>(hit) / static_cast<double>(claim_words.size());
  }

  std::optional<NliLabel> nli_label(std::string_view doc, std::string_view claim) override {
    return score(doc, claim) >= entail_threshold_ ? NliLabel::kEntailment : NliLabel::kNeutral;
  }

  bool counts_tokens() const override { return true; }

 private:
  double entail_threshold_;
};

}  // namespace factcg::eval
