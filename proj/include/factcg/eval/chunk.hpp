#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "factcg/error.hpp"
#include "factcg/eval/scorer.hpp"
#include "factcg/eval/sentences.hpp"
#include "factcg/text.hpp"

namespace factcg::eval {

using TokenCounter = std::function<std::size_t(std::string_view)>;

struct Chunk {
  std::string text;  // member sentences joined by single spaces
  std::size_t first_sentence = 0;
  std::size_t sentence_count = 0;
  std::size_t tokens = 0;
};

// Greedy left-to-right packing: a sentence joins the open chunk while the
// running token sum stays within budget. A sentence larger than the budget
// forms a chunk of its own.
inline std::vector<Chunk> chunk_sentences(const std::vector<std::string>& sentences,
                                          std::size_t budget, const TokenCounter& count) {
  require(budget >= 1, ErrorKind::kContractViolation, "chunk budget must be >= 1");
  std::vector<Chunk> chunks;
  Chunk open;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::size_t t = count(sentences[i]);
    if (open.sentence_count > 0 && open.tokens + t > budget) {
      chunks.push_back(std::move(open));
      open = Chunk{};
    }
    if (open.sentence_count == 0) {
      open.first_sentence = i;
    } else {
      open.text += ' ';
    }
    open.text += sentences[i];
    open.tokens += t;
    ++open.sentence_count;
  }
  if (open.sentence_count > 0) chunks.push_back(std::move(open));
  return chunks;
}

inline std::vector<Chunk> chunk_document(std::string_view doc, std::size_t budget,
                                         const TokenCounter& count) {
  auto sentences = split_sentences(doc);
  require(!sentences.empty(), ErrorKind::kEmptyDocument, "document has no sentences");
  return chunk_sentences(sentences, budget, count);
}

// Scorer tokenizer when it has one, whitespace tokens otherwise.
inline TokenCounter token_counter_for(Scorer& scorer) {
  if (scorer.counts_tokens()) {
    return [&scorer](std::string_view s) { return scorer.token_count(s); };
  }
  return [](std::string_view s) { return text::whitespace_token_count(s); };
}

// Maximum chunk score. Any chunk failure fails the pair with kScoringFailed.
inline double score_pair(Scorer& scorer, std::string_view doc, std::string_view claim,
                         std::size_t budget, const TokenCounter& count) {
  auto chunks = chunk_document(doc, budget, count);
  std::vector<TextPair> pairs;
  pairs.reserve(chunks.size());
  for (auto& c : chunks) pairs.push_back(TextPair{std::move(c.text), std::string(claim)});
  std::vector<double> scores;
  try {
    scores = scorer.score_batch(pairs);
  } catch (const std::exception& e) {
    fail(ErrorKind::kScoringFailed, e.what());
  }
  require(scores.size() == pairs.size(), ErrorKind::kScoringFailed, "scorer returned wrong count");
  double best = 0.0;
  for (double s : scores) {
    require(s >= 0.0 && s <= 1.0, ErrorKind::kScoringFailed, "chunk score outside [0,1]");
    best = std::max(best, s);
  }
  return best;
}

inline double score_pair(Scorer& scorer, std::string_view doc, std::string_view claim,
                         std::size_t budget) {
  return score_pair(scorer, doc, claim, budget, token_counter_for(scorer));
}

}  // namespace factcg::eval
