#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "factcg/error.hpp"
#include "factcg/graph/context_graph.hpp"
#include "factcg/random.hpp"

namespace factcg::graph {

enum class Shape { kPath, kBranched };

constexpr std::string_view to_string(Shape s) { return s == Shape::kPath ? "path" : "branched"; }

inline std::optional<Shape> parse_shape(std::string_view s) {
  if (s == "path") return Shape::kPath;
  if (s == "branched") return Shape::kBranched;
  return std::nullopt;
}

struct SubGraph {
  std::string parent_doc_id;
  std::vector<Triple> edges;
  Shape shape = Shape::kPath;
  int hops = 0;
};

// Edge count of the connected component with the most edges. Duplicate
// edges (same EdgeKey) count once.
inline int largest_component_hops(std::span<const Triple> triples) {
  require(!triples.empty(), ErrorKind::kEmptyGraph, "largest_component_hops on empty set");
  std::set<EdgeKey> keys;
  for (const auto& t : triples) keys.insert(edge_key(t));
  std::map<std::string, std::size_t> ids;
  auto id = [&ids](const std::string& k) { return ids.try_emplace(k, ids.size()).first->second; };
  std::vector<std::pair<std::size_t, std::size_t>> ends;
  for (const auto& k : keys) ends.emplace_back(id(k.a), id(k.b));
  detail::DisjointSets ds(ids.size());
  for (auto [u, v] : ends) ds.unite(u, v);
  std::map<std::size_t, int> per_root;
  int best = 0;
  for (auto [u, v] : ends) best = std::max(best, ++per_root[ds.find(u)]);
  return best;
}

namespace detail {

// Every connected edge subset of exactly k edges, each as ascending edge
// indices, listed once. ESU-style expansion over the line graph: a subset is
// grown only from its smallest edge, and a candidate joins the extension set
// only if it is adjacent to the newest edge and to no earlier member.
inline std::vector<std::vector<std::size_t>> connected_edge_subsets(const ContextGraph& g,
                                                                    std::size_t k) {
  const std::size_t m = g.edge_count();
  std::vector<std::vector<std::size_t>> incident(g.node_count());
  for (std::size_t e = 0; e < m; ++e) {
    auto [u, v] = g.endpoints(e);
    incident[u].push_back(e);
    incident[v].push_back(e);
  }
  auto adjacent = [&g](std::size_t x, std::size_t y) {
    auto [a, b] = g.endpoints(x);
    auto [c, d] = g.endpoints(y);
    return a == c || a == d || b == c || b == d;
  };
  auto neighbours = [&](std::size_t e) {
    auto [u, v] = g.endpoints(e);
    std::vector<std::size_t> out;
    for (std::size_t f : incident[u]) if (f != e) out.push_back(f);
    for (std::size_t f : incident[v]) if (f != e) out.push_back(f);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };

  std::vector<std::vector<std::size_t>> result;
  std::vector<std::size_t> current;

  auto in_closed_neighbourhood = [&](std::size_t u) {
    for (std::size_t x : current) {
      if (x == u || adjacent(x, u)) return true;
    }
    return false;
  };

  auto extend = [&](auto& self, std::vector<std::size_t> ext, std::size_t root) -> void {
    if (current.size() == k) {
      auto sorted = current;
      std::sort(sorted.begin(), sorted.end());
      result.push_back(std::move(sorted));
      return;
    }
    while (!ext.empty()) {
      std::size_t w = ext.back();
      ext.pop_back();
      std::vector<std::size_t> next = ext;
      for (std::size_t u : neighbours(w)) {
        if (u > root && !in_closed_neighbourhood(u) &&
            std::find(next.begin(), next.end(), u) == next.end()) {
          next.push_back(u);
        }
      }
      current.push_back(w);
      self(self, std::move(next), root);
      current.pop_back();
    }
  };

  if (k == 0) return result;
  for (std::size_t root = 0; root < m; ++root) {
    std::vector<std::size_t> ext;
    for (std::size_t u : neighbours(root)) {
      if (u > root) ext.push_back(u);
    }
    current = {root};
    extend(extend, std::move(ext), root);
  }
  std::sort(result.begin(), result.end());
  return result;
}

inline std::size_t max_degree(const ContextGraph& g, std::span<const std::size_t> edges) {
  std::map<std::size_t, std::size_t> degree;
  std::size_t best = 0;
  for (std::size_t e : edges) {
    auto [u, v] = g.endpoints(e);
    best = std::max({best, ++degree[u], ++degree[v]});
  }
  return best;
}

}  // namespace detail

// All sub-graphs of exactly `hops` edges with the given shape, in
// lexicographic order of their sorted edge keys. `path` yields simple paths
// (as unordered edge sets); `branched` yields trees with a node of degree
// >= 3. Throws kCyclicGraph unless every component of g is a tree.
inline std::vector<SubGraph> enumerate_subgraphs(const ContextGraph& g, int hops, Shape shape) {
  require(hops >= 1, ErrorKind::kContractViolation, "hops must be >= 1");
  require(is_forest(g), ErrorKind::kCyclicGraph,
          "doc '" + g.doc_id() + "' has a cyclic component; filter it first");
  std::vector<SubGraph> out;
  for (const auto& subset : detail::connected_edge_subsets(g, static_cast<std::size_t>(hops))) {
    const bool path = detail::max_degree(g, subset) <= 2;
    if (path != (shape == Shape::kPath)) continue;
    SubGraph sg{g.doc_id(), {}, shape, hops};
    sg.edges.reserve(subset.size());
    for (std::size_t e : subset) sg.edges.push_back(g.edges()[e]);
    out.push_back(std::move(sg));
  }
  return out;
}

// Seeded uniform choice of up to `cap` sub-graphs; relative order preserved.
inline std::vector<SubGraph> sample_subgraphs(std::vector<SubGraph> all, std::size_t cap,
                                              std::uint64_t seed) {
  if (all.size() <= cap) return all;
  Rng rng(seed);
  std::vector<SubGraph> out;
  for (std::size_t i : rng.sample_indices(all.size(), cap)) out.push_back(std::move(all[i]));
  return out;
}

inline Triple pick_edge(std::span<const Triple> edges, std::uint64_t seed) {
  require(!edges.empty(), ErrorKind::kEmptyGraph, "pick_edge on empty sub-graph");
  Rng rng(seed);
  return edges[static_cast<std::size_t>(rng.uniform_index(edges.size()))];
}

inline Triple pick_edge(const SubGraph& sub, std::uint64_t seed) { return pick_edge(sub.edges, seed); }

// Distinct entity surfaces of a triple set, ordered by normalized key.
inline std::vector<std::string> entity_surfaces(std::span<const Triple> edges) {
  std::map<std::string, std::string> nodes;
  auto note = [&nodes](const std::string& surface) {
    auto [it, inserted] = nodes.emplace(text::normalize_key(surface), surface);
    if (!inserted && surface < it->second) it->second = surface;
  };
  for (const auto& t : edges) {
    note(t.head);
    note(t.tail);
  }
  std::vector<std::string> out;
  out.reserve(nodes.size());
  for (auto& [k, s] : nodes) out.push_back(s);
  return out;
}

}  // namespace factcg::graph
