#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "factcg/error.hpp"
#include "factcg/graph/triple.hpp"

namespace factcg::graph {

namespace detail {

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n), size(n, 1) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(std::size_t x, std::size_t y) {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    if (size[x] < size[y]) std::swap(x, y);
    parent[y] = x;
    size[x] += size[y];
    return true;
  }
  std::vector<std::size_t> parent;
  std::vector<std::size_t> size;
};

}  // namespace detail

struct Node {
  std::string key;      // normalized identity
  std::string surface;  // rendering form
  bool operator==(const Node&) const = default;
};

// Undirected multigraph over normalized entities, collapsed on EdgeKey.
// Nodes are sorted by key and edges by EdgeKey, so construction is
// insensitive to input order.
class ContextGraph {
 public:
  // Throws kEmptyGraph on an empty triple list.
  static ContextGraph build(std::span<const Triple> triples, std::string doc_id) {
    require(!triples.empty(), ErrorKind::kEmptyGraph, "no triples for doc '" + doc_id + "'");
    ContextGraph g;
    g.doc_id_ = std::move(doc_id);

    // Keep the smallest surface among duplicates so the result does not
    // depend on which duplicate arrived first.
    std::map<EdgeKey, Triple> edges;
    std::map<std::string, std::string> nodes;
    auto note_node = [&nodes](const std::string& surface) {
      auto key = text::normalize_key(surface);
      auto [it, inserted] = nodes.emplace(std::move(key), surface);
      if (!inserted && surface < it->second) it->second = surface;
    };
    for (const Triple& t : triples) {
      auto key = edge_key(t);
      require(key.a != key.b, ErrorKind::kInvalidTriple, "self-loop on entity '" + t.head + "'");
      require(!key.a.empty() && !key.relation.empty(), ErrorKind::kInvalidTriple,
              "empty triple field");
      auto [it, inserted] = edges.emplace(std::move(key), t);
      if (!inserted && std::tie(t.head, t.tail, t.relation) <
                           std::tie(it->second.head, it->second.tail, it->second.relation)) {
        it->second = t;
      }
      note_node(t.head);
      note_node(t.tail);
    }
    for (auto& [key, surface] : nodes) g.nodes_.push_back(Node{key, surface});
    for (auto& [key, triple] : edges) {
      g.ends_.emplace_back(g.node_index(key.a), g.node_index(key.b));
      g.keys_.push_back(key);
      g.edges_.push_back(triple);
    }
    return g;
  }

  const std::string& doc_id() const { return doc_id_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Triple>& edges() const { return edges_; }
  const std::vector<EdgeKey>& edge_keys() const { return keys_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  // Endpoint node indices of edge i, smaller key first.
  std::pair<std::size_t, std::size_t> endpoints(std::size_t i) const { return ends_[i]; }

  std::optional<std::size_t> find_node(std::string_view entity) const {
    auto key = text::normalize_key(entity);
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), key,
                               [](const Node& n, const std::string& k) { return n.key < k; });
    if (it == nodes_.end() || it->key != key) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
  }

  std::optional<std::size_t> find_edge(const Triple& t) const {
    auto key = edge_key(t);
    auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
    if (it == keys_.end() || *it != key) return std::nullopt;
    return static_cast<std::size_t>(it - keys_.begin());
  }

  bool contains(const Triple& t) const { return find_edge(t).has_value(); }

  std::size_t component_count() const {
    detail::DisjointSets ds(nodes_.size());
    std::size_t count = nodes_.size();
    for (auto [u, v] : ends_) {
      if (ds.unite(u, v)) --count;
    }
    return count;
  }

  bool is_connected() const { return component_count() == 1; }

  // Graph identity: same doc, same node keys, same edge keys.
  bool operator==(const ContextGraph& other) const {
    if (doc_id_ != other.doc_id_ || keys_ != other.keys_) return false;
    if (nodes_.size() != other.nodes_.size()) return false;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].key != other.nodes_[i].key) return false;
    }
    return true;
  }

 private:
  ContextGraph() = default;

  std::size_t node_index(const std::string& key) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), key,
                               [](const Node& n, const std::string& k) { return n.key < k; });
    return static_cast<std::size_t>(it - nodes_.begin());
  }

  std::string doc_id_;
  std::vector<Node> nodes_;
  std::vector<Triple> edges_;
  std::vector<EdgeKey> keys_;
  std::vector<std::pair<std::size_t, std::size_t>> ends_;
};

inline ContextGraph build_graph(std::span<const Triple> triples, std::string doc_id) {
  return ContextGraph::build(triples, std::move(doc_id));
}

// Partition of the edges into connected components ("each triple shares at
// least one entity within its cluster"). Components are ordered by their
// smallest edge key.
inline std::vector<ContextGraph> cluster_components(const ContextGraph& g) {
  detail::DisjointSets ds(g.node_count());
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    auto [u, v] = g.endpoints(i);
    ds.unite(u, v);
  }
  std::map<std::size_t, std::vector<Triple>> groups;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    std::size_t root = ds.find(g.endpoints(i).first);
    auto [it, inserted] = groups.try_emplace(root);
    if (inserted) order.push_back(root);
    it->second.push_back(g.edges()[i]);
  }
  std::vector<ContextGraph> out;
  out.reserve(order.size());
  for (std::size_t root : order) out.push_back(ContextGraph::build(groups[root], g.doc_id()));
  return out;
}

// For a connected component: true iff it is a tree. Parallel edges with
// different relations count as a 2-cycle.
inline bool is_acyclic(const ContextGraph& component) {
  require(component.is_connected(), ErrorKind::kContractViolation,
          "is_acyclic requires a connected component");
  return component.edge_count() + 1 == component.node_count();
}

inline bool is_forest(const ContextGraph& g) {
  return g.edge_count() + g.component_count() == g.node_count();
}

// Union of the acyclic components; nullopt when every component is cyclic.
inline std::optional<ContextGraph> drop_cyclic_components(const ContextGraph& g) {
  std::vector<Triple> kept;
  for (const auto& c : cluster_components(g)) {
    if (is_acyclic(c)) kept.insert(kept.end(), c.edges().begin(), c.edges().end());
  }
  if (kept.empty()) return std::nullopt;
  return ContextGraph::build(kept, g.doc_id());
}

}  // namespace factcg::graph
