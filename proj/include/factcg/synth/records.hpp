#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "factcg/error.hpp"
#include "factcg/text.hpp"

namespace factcg::synth {

enum class Source { kCg2cDoc, kHotpotQa, kMusique };

constexpr std::string_view to_string(Source s) {
  switch (s) {
    case Source::kCg2cDoc: return "cg2c_doc";
    case Source::kHotpotQa: return "hotpotqa";
    case Source::kMusique: return "musique";
  }
  return "";
}

inline std::optional<Source> parse_source(std::string_view s) {
  for (Source src : {Source::kCg2cDoc, Source::kHotpotQa, Source::kMusique}) {
    if (to_string(src) == s) return src;
  }
  return std::nullopt;
}

struct SampleRecord {
  std::string id;
  std::string doc;
  std::string claim;
  int label = 1;  // 1 grounded, 0 ungrounded
  Source source = Source::kCg2cDoc;
  std::optional<int> hops;
  std::optional<std::string> pair_id;
  nlohmann::json meta = nlohmann::json::object();
};

inline nlohmann::json to_json(const SampleRecord& r) {
  nlohmann::json j = {{"id", r.id},
                      {"doc", r.doc},
                      {"claim", r.claim},
                      {"label", r.label},
                      {"source", to_string(r.source)},
                      {"meta", r.meta}};
  j["hops"] = r.hops ? nlohmann::json(*r.hops) : nlohmann::json(nullptr);
  j["pair_id"] = r.pair_id ? nlohmann::json(*r.pair_id) : nlohmann::json(nullptr);
  return j;
}

inline SampleRecord sample_from_json(const nlohmann::json& j) {
  SampleRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.doc = j.at("doc").get<std::string>();
    r.claim = j.at("claim").get<std::string>();
    r.label = j.at("label").get<int>();
    auto src = parse_source(j.at("source").get<std::string>());
    if (!src) fail(ErrorKind::kData, "unknown source in sample " + r.id);
    r.source = *src;
    if (j.contains("hops") && !j["hops"].is_null()) r.hops = j["hops"].get<int>();
    if (j.contains("pair_id") && !j["pair_id"].is_null()) r.pair_id = j["pair_id"].get<std::string>();
    if (j.contains("meta")) r.meta = j["meta"];
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kData, std::string("sample record: ") + e.what());
  }
  require(r.label == 0 || r.label == 1, ErrorKind::kData, "label must be 0 or 1 in " + r.id);
  return r;
}

struct MhqaRecord {
  std::string id;
  std::string doc;
  std::string question;
  std::string answer;
  std::vector<std::string> supporting_sentences;
  bool answerable = true;
  Source source = Source::kHotpotQa;
  std::optional<int> declared_hops;
};

inline MhqaRecord mhqa_from_json(const nlohmann::json& j) {
  MhqaRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.doc = j.at("doc").get<std::string>();
    r.question = j.value("question", "");
    r.answer = j.value("answer", "");
    r.supporting_sentences = j.value("supporting_sentences", std::vector<std::string>{});
    r.answerable = j.value("answerable", true);
    auto src = parse_source(j.at("source").get<std::string>());
    if (!src || *src == Source::kCg2cDoc) fail(ErrorKind::kData, "unsupported source in record " + r.id);
    r.source = *src;
    if (j.contains("declared_hops") && !j["declared_hops"].is_null()) {
      r.declared_hops = j["declared_hops"].get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kData, std::string("mhqa record: ") + e.what());
  }
  return r;
}

// Supporting sentences must appear verbatim in the document.
inline bool supports_are_verbatim(const MhqaRecord& r) {
  for (const auto& s : r.supporting_sentences) {
    if (r.doc.find(s) == std::string::npos) return false;
  }
  return true;
}

struct DocRecord {
  std::string id;
  std::string doc;
};

inline DocRecord doc_from_json(const nlohmann::json& j) {
  try {
    return DocRecord{j.at("id").get<std::string>(), j.at("doc").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kData, std::string("doc record: ") + e.what());
  }
}

}  // namespace factcg::synth
