#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "factcg/error.hpp"
#include "factcg/random.hpp"
#include "factcg/text.hpp"

namespace factcg::eval {

// A document split into sentences, a claim, and its evidence sets: each set
// is a minimal group of sentence indices sufficient to verify the claim.
struct EvidenceRecord {
  std::string doc_id;
  std::vector<std::string> sentences;
  std::string claim;
  std::vector<std::vector<std::size_t>> evidence_sets;
  int label = 1;
};

inline EvidenceRecord evidence_from_json(const nlohmann::json& j) {
  EvidenceRecord r;
  try {
    r.doc_id = j.at("doc_id").get<std::string>();
    r.sentences = j.at("sentences").get<std::vector<std::string>>();
    r.claim = j.at("claim").get<std::string>();
    r.evidence_sets = j.at("evidence_sets").get<std::vector<std::vector<std::size_t>>>();
    r.label = j.value("label", 1);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kData, std::string("evidence record: ") + e.what());
  }
  return r;
}

inline nlohmann::json to_json(const EvidenceRecord& r) {
  return {{"doc_id", r.doc_id},
          {"sentences", r.sentences},
          {"claim", r.claim},
          {"evidence_sets", r.evidence_sets},
          {"label", r.label}};
}

struct CorePair {
  std::string doc_id;
  std::string claim;
  std::string positive_doc;
  std::string negative_doc;  // positive sentences minus `removed`, order kept
  std::vector<std::size_t> removed;
};

inline nlohmann::json to_json(const CorePair& p) {
  return {{"doc_id", p.doc_id},
          {"claim", p.claim},
          {"positive_doc", p.positive_doc},
          {"negative_doc", p.negative_doc},
          {"removed", p.removed}};
}

inline CorePair core_pair_from_json(const nlohmann::json& j) {
  try {
    return CorePair{j.at("doc_id").get<std::string>(), j.at("claim").get<std::string>(),
                    j.at("positive_doc").get<std::string>(), j.at("negative_doc").get<std::string>(),
                    j.value("removed", std::vector<std::size_t>{})};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kData, std::string("core pair: ") + e.what());
  }
}

struct CoreBuildResult {
  std::vector<CorePair> pairs;
  std::size_t skipped_small_evidence = 0;  // some evidence set has < 2 sentences
  std::size_t skipped_invalid = 0;         // bad index, empty set, or no sets
  std::size_t skipped_negative = 0;        // label != 1
};

inline bool hits_every_set(std::span<const std::vector<std::size_t>> sets,
                           std::span<const std::size_t> removed) {
  for (const auto& s : sets) {
    bool hit = std::any_of(s.begin(), s.end(), [&](std::size_t i) {
      return std::find(removed.begin(), removed.end(), i) != removed.end();
    });
    if (!hit) return false;
  }
  return true;
}

// Random greedy hitting set per record: repeatedly pick a random evidence set
// not yet hit and remove one random member sentence, until every set has
// lost at least one sentence.
inline CoreBuildResult build_core_dataset(std::span<const EvidenceRecord> records,
                                          std::uint64_t seed) {
  CoreBuildResult result;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.label != 1) {
      ++result.skipped_negative;
      continue;
    }
    bool valid = !rec.evidence_sets.empty() && !rec.sentences.empty();
    bool small = false;
    for (const auto& s : rec.evidence_sets) {
      if (s.empty()) valid = false;
      if (s.size() < 2) small = true;
      for (std::size_t i : s) {
        if (i >= rec.sentences.size()) valid = false;
      }
    }
    if (!valid) {
      ++result.skipped_invalid;
      continue;
    }
    if (small) {
      ++result.skipped_small_evidence;
      continue;
    }

    Rng rng(derive_seed(seed, "core:" + std::to_string(r) + ":" + rec.doc_id));
    std::set<std::size_t> removed;
    std::vector<bool> hit(rec.evidence_sets.size(), false);
    auto refresh = [&] {
      std::vector<std::size_t> open;
      for (std::size_t j = 0; j < rec.evidence_sets.size(); ++j) {
        if (!hit[j]) {
          hit[j] = std::any_of(rec.evidence_sets[j].begin(), rec.evidence_sets[j].end(),
                               [&](std::size_t i) { return removed.count(i) > 0; });
        }
        if (!hit[j]) open.push_back(j);
      }
      return open;
    };
    for (auto open = refresh(); !open.empty(); open = refresh()) {
      const auto& set = rec.evidence_sets[open[rng.uniform_index(open.size())]];
      removed.insert(set[rng.uniform_index(set.size())]);
    }

    CorePair pair;
    pair.doc_id = rec.doc_id;
    pair.claim = rec.claim;
    pair.positive_doc = text::join(rec.sentences, " ");
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < rec.sentences.size(); ++i) {
      if (removed.count(i) == 0) kept.push_back(rec.sentences[i]);
    }
    pair.negative_doc = text::join(kept, " ");
    pair.removed.assign(removed.begin(), removed.end());
    result.pairs.push_back(std::move(pair));
  }
  return result;
}

struct CoreMetrics {
  double accuracy = 0.0;
  std::optional<double> precision;  // undefined when no positive is predicted
  std::size_t connected = 0;
  std::size_t predicted_positive = 0;
  std::size_t pairs = 0;
};

// connected_i = pos_i >= theta && neg_i < theta.
// accuracy = #connected / |I|; precision = #connected / #(pos_i >= theta).
inline CoreMetrics core_metrics(std::span<const std::pair<double, double>> pair_scores,
                                double threshold) {
  require(!pair_scores.empty(), ErrorKind::kPrecondition, "core_metrics needs at least one pair");
  require(threshold >= 0.0 && threshold <= 1.0, ErrorKind::kPrecondition,
          "threshold must be in [0,1]");
  CoreMetrics m;
  m.pairs = pair_scores.size();
  for (auto [pos, neg] : pair_scores) {
    if (pos >= threshold) {
      ++m.predicted_positive;
      if (neg < threshold) ++m.connected;
    }
  }
  m.accuracy = static_cast<double>(m.connected) / static_cast<double>(m.pairs);
  if (m.predicted_positive > 0) {
    m.precision = static_cast<double>(m.connected) / static_cast<double>(m.predicted_positive);
  }
  return m;
}

}  // namespace factcg::eval
