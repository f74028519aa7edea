#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "factcg/error.hpp"
#include "factcg/graph/triple.hpp"
#include "factcg/prompt/templates.hpp"
#include "factcg/text.hpp"

namespace factcg::prompt {

using graph::Triple;

// Parser output. Each non-blank input line is exactly one of: a parsed
// triple, a group separator, or a rejected line.
struct ParsedTriples {
  std::vector<std::vector<Triple>> groups;
  std::vector<std::string> rejected_lines;
  std::size_t parsed_lines = 0;
  std::size_t separator_lines = 0;
  std::size_t blank_lines = 0;

  std::size_t triple_count() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.size();
    return n;
  }

  std::vector<Triple> flatten() const {
    std::vector<Triple> out;
    for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
    return out;
  }
};

namespace detail {

// Drops list markers an LLM tends to add: "- ", "* ", "• ", "3. ", "3) ".
inline std::string_view strip_bullet(std::string_view line) {
  line = text::trim(line);
  for (std::string_view marker : {std::string_view("- "), std::string_view("* "),
                                  std::string_view("\xE2\x80\xA2 ")}) {
    if (line.substr(0, marker.size()) == marker) return text::trim(line.substr(marker.size()));
  }
  std::size_t i = 0;
  while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
  if (i > 0 && i + 1 < line.size() && (line[i] == '.' || line[i] == ')') && line[i + 1] == ' ') {
    return text::trim(line.substr(i + 2));
  }
  return line;
}

// Only a matching outer pair is removed: "(1998) x ... (y)" keeps both.
inline std::string_view strip_parens(std::string_view s) {
  s = text::trim(s);
  if (s.size() < 2 || s.front() != '(' || s.back() != ')') return s;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')' && --depth == 0 && i + 1 < s.size()) return s;
  }
  return depth == 0 ? text::trim(s.substr(1, s.size() - 2)) : s;
}

constexpr bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Comma positions outside brackets and quotes. A comma between digits
// ("July 16, 1966", "1,000") belongs to its token and is not a separator.
inline std::vector<std::size_t> top_level_commas(std::string_view s) {
  std::vector<std::size_t> out;
  int depth = 0;
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '"') quoted = !quoted;
    if (quoted) continue;
    if (c == '(' || c == '[' || c == '{') ++depth;
    if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
    if (c != ',' || depth != 0) continue;
    std::size_t next = i + 1;
    while (next < s.size() && s[next] == ' ') ++next;
    if (i > 0 && is_digit(s[i - 1]) && next < s.size() && is_digit(s[next])) continue;
    out.push_back(i);
  }
  return out;
}

inline std::vector<std::string_view> split_on(std::string_view s, std::string_view delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + delim.size();
  }
}

}  // namespace detail

// "(head, relation, tail)" lines; everything in one group. Head is before the
// first top-level comma, tail after the last, relation is what lies between.
inline ParsedTriples try_parse_triples_mhqa(std::string_view completion) {
  ParsedTriples out;
  out.groups.emplace_back();
  for (std::string_view raw : text::split_lines(completion)) {
    std::string_view line = detail::strip_bullet(raw);
    if (line.empty()) {
      ++out.blank_lines;
      continue;
    }
    bool ok = false;
    if (line.size() >= 2 && line.front() == '(' && line.back() == ')') {
      std::string_view inner = line.substr(1, line.size() - 2);
      auto commas = detail::top_level_commas(inner);
      if (commas.size() >= 2) {
        std::string_view head = inner.substr(0, commas.front());
        std::string_view relation = inner.substr(commas.front() + 1, commas.back() - commas.front() - 1);
        std::string_view tail = inner.substr(commas.back() + 1);
        try {
          out.groups.back().push_back(graph::make_triple(head, tail, relation));
          ok = true;
        } catch (const Error&) {
        }
      }
    }
    if (ok) {
      ++out.parsed_lines;
    } else {
      out.rejected_lines.emplace_back(raw);
    }
  }
  if (out.groups.back().empty()) out.groups.clear();
  return out;
}

inline ParsedTriples parse_triples_mhqa(std::string_view completion) {
  auto parsed = try_parse_triples_mhqa(completion);
  if (parsed.triple_count() == 0) {
    fail(ErrorKind::kAllRejected,
         std::to_string(parsed.rejected_lines.size()) + " line(s) rejected, no triples parsed");
  }
  return parsed;
}

// "head <tuple> tail <tuple> relation" lines, optionally parenthesised;
// a line holding only the group delimiter closes the current group.
inline ParsedTriples try_parse_triples_doc(std::string_view completion, const Delimiters& delims) {
  require(!delims.tuple.empty() && !delims.group.empty() && delims.tuple != delims.group,
          ErrorKind::kContractViolation, "delimiters must be non-empty and distinct");
  ParsedTriples out;
  std::vector<Triple> current;
  auto close_group = [&] {
    if (!current.empty()) out.groups.push_back(std::move(current));
    current.clear();
  };
  for (std::string_view raw : text::split_lines(completion)) {
    std::string_view line = detail::strip_bullet(raw);
    if (line.empty()) {
      ++out.blank_lines;
      continue;
    }
    if (line == delims.group) {
      ++out.separator_lines;
      close_group();
      continue;
    }
    bool ok = false;
    auto fields = detail::split_on(detail::strip_parens(line), delims.tuple);
    if (fields.size() == 3) {
      try {
        current.push_back(graph::make_triple(fields[0], fields[1], fields[2]));
        ok = true;
      } catch (const Error&) {
      }
    }
    if (ok) {
      ++out.parsed_lines;
    } else {
      out.rejected_lines.emplace_back(raw);
    }
  }
  close_group();
  return out;
}

inline ParsedTriples parse_triples_doc(std::string_view completion, const Delimiters& delims) {
  auto parsed = try_parse_triples_doc(completion, delims);
  if (parsed.triple_count() == 0) {
    fail(ErrorKind::kAllRejected,
         std::to_string(parsed.rejected_lines.size()) + " line(s) rejected, no triples parsed");
  }
  return parsed;
}

inline std::string format_triple_doc(const Triple& t, const Delimiters& delims) {
  return t.head + " " + delims.tuple + " " + t.tail + " " + delims.tuple + " " + t.relation;
}

// Inverse of parse_triples_doc.
inline std::string serialize_triples_doc(const std::vector<std::vector<Triple>>& groups,
                                         const Delimiters& delims) {
  std::string out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (g > 0) out += delims.group + "\n";
    for (const auto& t : groups[g]) out += format_triple_doc(t, delims) + "\n";
  }
  return out;
}

// Header lines a completion may echo back from the prompt tail.
inline constexpr std::array<std::string_view, 5> kEchoHeaders = {
    "Single declarative sentence:",
    "Your Claim:",
    "Rewrite Sentences with Relationship Between Provided Two Entites Removed:",
    "Rewrite Sentences with Relationship Between Provided Two Entities Removed:",
    "Rewrite Sentences:",
};

inline std::string parse_single_text(std::string_view completion) {
  std::string_view s = text::trim(completion);
  for (std::string_view header : kEchoHeaders) {
    if (text::starts_with_icase(s, header)) {
      s = text::trim(s.substr(header.size()));
      break;
    }
  }
  require(!s.empty(), ErrorKind::kEmptyCompletion, "completion is empty after stripping");
  return std::string(s);
}

}  // namespace factcg::prompt
