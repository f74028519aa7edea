#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "factcg/error.hpp"

namespace factcg::prompt {

enum class TemplateId {
  kCgMhqa,
  kCgDoc,
  kSubgraphMap,
  kQaToClaim,
  kRelationRemoval,
  kClaimFromGraph,
};

inline constexpr std::array kAllTemplates = {
    TemplateId::kCgMhqa,    TemplateId::kCgDoc,           TemplateId::kSubgraphMap,
    TemplateId::kQaToClaim, TemplateId::kRelationRemoval, TemplateId::kClaimFromGraph,
};

constexpr std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::kCgMhqa: return "cg_mhqa";
    case TemplateId::kCgDoc: return "cg_doc";
    case TemplateId::kSubgraphMap: return "subgraph_map";
    case TemplateId::kQaToClaim: return "qa_to_claim";
    case TemplateId::kRelationRemoval: return "relation_removal";
    case TemplateId::kClaimFromGraph: return "claim_from_graph";
  }
  return "";
}

inline std::optional<TemplateId> parse_template_id(std::string_view s) {
  for (TemplateId id : kAllTemplates) {
    if (to_string(id) == s) return id;
  }
  return std::nullopt;
}

struct Delimiters {
  std::string tuple = "<|>";
  std::string group = "##";
};

using Slots = std::map<std::string, std::string, std::less<>>;

// A template body with {{NAME}} slots plus the symbolic {tuple_delimiter} and
// {group_delimiter} placeholders, which are filled from Delimiters.
class PromptTemplate {
 public:
  PromptTemplate(TemplateId id, std::string body) : id_(id), body_(std::move(body)) {
    for (const auto& piece : scan()) {
      if (piece.kind == Piece::kSlot) slots_.insert(std::string(piece.text));
    }
  }

  TemplateId id() const { return id_; }
  const std::string& body() const { return body_; }
  const std::set<std::string>& slot_names() const { return slots_; }

  // Single pass: slot values are copied verbatim and never re-expanded.
  std::string render(const Slots& slots, const Delimiters& delims) const {
    for (const auto& name : slots_) {
      auto it = slots.find(name);
      if (it == slots.end() || it->second.empty()) {
        fail(ErrorKind::kMissingSlot,
             "template '" + std::string(to_string(id_)) + "' needs slot " + name);
      }
    }
    std::string out;
    out.reserve(body_.size() + 256);
    for (const auto& piece : scan()) {
      switch (piece.kind) {
        case Piece::kLiteral: out.append(piece.text); break;
        case Piece::kSlot: out.append(slots.find(piece.text)->second); break;
        case Piece::kTupleDelimiter: out.append(delims.tuple); break;
        case Piece::kGroupDelimiter: out.append(delims.group); break;
      }
    }
    return out;
  }

 private:
  struct Piece {
    enum Kind { kLiteral, kSlot, kTupleDelimiter, kGroupDelimiter } kind;
    std::string_view text;
  };

  static bool is_slot_char(char c) { return (c >= 'A' && c <= 'Z') || c == '_' || (c >= '0' && c <= '9'); }

  std::vector<Piece> scan() const {
    static constexpr std::string_view kTuple = "{tuple_delimiter}";
    static constexpr std::string_view kGroup = "{group_delimiter}";
    std::vector<Piece> pieces;
    std::string_view body = body_;
    std::size_t lit = 0;
    std::size_t i = 0;
    auto flush = [&](std::size_t end) {
      if (end > lit) pieces.push_back({Piece::kLiteral, body.substr(lit, end - lit)});
    };
    while (i < body.size()) {
      if (body.compare(i, kTuple.size(), kTuple) == 0) {
        flush(i);
        pieces.push_back({Piece::kTupleDelimiter, {}});
        i += kTuple.size();
        lit = i;
      } else if (body.compare(i, kGroup.size(), kGroup) == 0) {
        flush(i);
        pieces.push_back({Piece::kGroupDelimiter, {}});
        i += kGroup.size();
        lit = i;
      } else if (body.compare(i, 2, "{{") == 0) {
        std::size_t j = i + 2;
        while (j < body.size() && is_slot_char(body[j])) ++j;
        if (j > i + 2 && body.compare(j, 2, "}}") == 0) {
          flush(i);
          pieces.push_back({Piece::kSlot, body.substr(i + 2, j - i - 2)});
          i = j + 2;
          lit = i;
        } else {
          ++i;
        }
      } else {
        ++i;
      }
    }
    flush(body.size());
    return pieces;
  }

  TemplateId id_;
  std::string body_;
  std::set<std::string> slots_;
};

// Loads `<template_id>.txt` for every template from a prompts directory.
class TemplateRegistry {
 public:
  static TemplateRegistry load(const std::filesystem::path& dir, Delimiters delims = {}) {
    TemplateRegistry reg;
    reg.delims_ = std::move(delims);
    for (TemplateId id : kAllTemplates) {
      auto path = dir / (std::string(to_string(id)) + ".txt");
      std::ifstream in(path, std::ios::binary);
      if (!in) fail(ErrorKind::kIo, "cannot read prompt template " + path.string());
      std::ostringstream ss;
      ss << in.rdbuf();
      reg.templates_.emplace(id, PromptTemplate(id, ss.str()));
    }
    return reg;
  }

  const Delimiters& delimiters() const { return delims_; }

  const PromptTemplate& get(TemplateId id) const { return templates_.at(id); }

  std::string render(TemplateId id, const Slots& slots) const {
    return get(id).render(slots, delims_);
  }

  std::string render(std::string_view id, const Slots& slots) const {
    auto parsed = parse_template_id(id);
    if (!parsed) fail(ErrorKind::kUnknownTemplate, "unknown template '" + std::string(id) + "'");
    return render(*parsed, slots);
  }

 private:
  TemplateRegistry() = default;
  Delimiters delims_;
  std::map<TemplateId, PromptTemplate> templates_;
};

}  // namespace factcg::prompt
