#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "factcg/text.hpp"

namespace factcg::eval {

namespace detail {

inline const std::set<std::string, std::less<>>& abbreviations() {
  static const std::set<std::string, std::less<>> kAbbrev = {
      "mr",   "mrs",  "ms",   "dr",   "prof", "sr",   "jr",   "st",   "vs",   "e.g",  "i.e",
      "inc",  "ltd",  "co",   "corp", "no",   "fig",  "u.s",  "u.k",  "jan",  "feb",  "mar",
      "apr",  "jun",  "jul",  "aug",  "sep",  "sept", "oct",  "nov",  "dec",  "a.m",  "p.m",
      "approx", "dept", "est", "gen",  "gov",  "lt",   "mt",   "rev",  "sgt",  "capt", "col",
      "cf",   "al",   "vol",  "pp",   "ft",   "op",
  };
  return kAbbrev;
}

constexpr bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

constexpr bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

inline bool starts_with_closer(std::string_view s, std::size_t i, std::size_t& width) {
  // ASCII closers plus UTF-8 right quotes (U+2019, U+201D).
  if (i < s.size() && is_closer(s[i])) {
    width = 1;
    return true;
  }
  if (i + 3 <= s.size() && s.compare(i, 3, "\xE2\x80\x99") == 0) {
    width = 3;
    return true;
  }
  if (i + 3 <= s.size() && s.compare(i, 3, "\xE2\x80\x9D") == 0) {
    width = 3;
    return true;
  }
  return false;
}

// Word ending at position `dot` (exclusive), lowercased.
inline std::string word_before(std::string_view s, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && !text::is_space(s[b - 1]) && s[b - 1] != '(' && s[b - 1] != '"') --b;
  std::string w(s.substr(b, dot - b));
  for (char& c : w) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return w;
}

}  // namespace detail

// Rule-based splitter: a boundary is terminal punctuation, optionally
// followed by closing quotes or brackets, then whitespace. Periods after
// known abbreviations or single-letter initials are not boundaries, nor is
// any period followed by a lowercase word. A blank line always ends a
// sentence. Returned sentences are trimmed and non-empty.
inline std::vector<std::string> split_sentences(std::string_view doc) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    auto s = text::trim(doc.substr(start, end - start));
    if (!s.empty()) out.emplace_back(s);
    start = end;
  };
  std::size_t i = 0;
  while (i < doc.size()) {
    char c = doc[i];
    if (c == '\n') {
      std::size_t j = i + 1;
      while (j < doc.size() && (doc[j] == ' ' || doc[j] == '\t' || doc[j] == '\r')) ++j;
      if (j < doc.size() && doc[j] == '\n') {
        emit(i);
        i = j + 1;
        continue;
      }
      ++i;
      continue;
    }
    if (!detail::is_terminal(c)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < doc.size() && detail::is_terminal(doc[j])) ++j;
    std::size_t width = 0;
    while (detail::starts_with_closer(doc, j, width)) j += width;
    if (j < doc.size() && !text::is_space(doc[j])) {
      i = j;
      continue;
    }
    if (c == '.' && j == i + 1) {
      std::string w = detail::word_before(doc, i);
      bool initial = w.size() == 1 && w[0] >= 'a' && w[0] <= 'z';
      if (initial || detail::abbreviations().count(w) > 0) {
        i = j;
        continue;
      }
    }
    std::size_t k = j;
    while (k < doc.size() && text::is_space(doc[k])) ++k;
    if (k < doc.size() && doc[k] >= 'a' && doc[k] <= 'z') {
      i = j;
      continue;
    }
    emit(j);
    i = j;
  }
  emit(doc.size());
  return out;
}

}  // namespace factcg::eval
