#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>

#include "factcg/error.hpp"
#include "factcg/text.hpp"

namespace factcg::graph {

struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const SourceSpan&) const = default;
};

// An undirected entity-entity edge. `relation` is a short free-text sentence
// describing how the two entities connect; it carries no direction.
struct Triple {
  std::string head;
  std::string tail;
  std::string relation;
  std::optional<SourceSpan> source_span;

  // Field-wise surface equality. Graph identity uses EdgeKey instead.
  bool operator==(const Triple&) const = default;
};

// Surfaces are whitespace-collapsed; throws kInvalidTriple on an empty field
// or a self-loop (head and tail equal after normalization).
inline Triple make_triple(std::string_view head, std::string_view tail, std::string_view relation,
                          std::optional<SourceSpan> span = std::nullopt) {
  Triple t{text::collapse_whitespace(head), text::collapse_whitespace(tail),
           text::collapse_whitespace(relation), span};
  require(!t.head.empty(), ErrorKind::kInvalidTriple, "empty head entity");
  require(!t.tail.empty(), ErrorKind::kInvalidTriple, "empty tail entity");
  require(!t.relation.empty(), ErrorKind::kInvalidTriple, "empty relation");
  require(text::normalize_key(t.head) != text::normalize_key(t.tail), ErrorKind::kInvalidTriple,
          "self-loop on entity '" + t.head + "'");
  return t;
}

// Unordered endpoint pair plus relation, all normalized. Two triples are the
// same edge iff their keys are equal.
struct EdgeKey {
  std::string a;
  std::string b;
  std::string relation;
  auto operator<=>(const EdgeKey&) const = default;
};

inline EdgeKey edge_key(const Triple& t) {
  std::string h = text::normalize_key(t.head);
  std::string k = text::normalize_key(t.tail);
  if (k < h) std::swap(h, k);
  return EdgeKey{std::move(h), std::move(k), text::normalize_key(t.relation)};
}

inline bool same_edge(const Triple& x, const Triple& y) { return edge_key(x) == edge_key(y); }

}  // namespace factcg::graph
