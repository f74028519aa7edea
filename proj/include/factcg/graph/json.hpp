#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "factcg/error.hpp"
#include "factcg/graph/context_graph.hpp"
#include "factcg/graph/subgraph.hpp"

namespace factcg::graph {

inline nlohmann::json triple_to_json(const Triple& t) {
  return {{"head", t.head}, {"tail", t.tail}, {"relation", t.relation}};
}

inline Triple triple_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("head") || !j.contains("tail") || !j.contains("relation")) {
    fail(ErrorKind::kData, "triple object needs head, tail, relation");
  }
  return make_triple(j.at("head").get<std::string>(), j.at("tail").get<std::string>(),
                     j.at("relation").get<std::string>());
}

inline nlohmann::json triples_to_json(std::span<const Triple> ts) {
  auto arr = nlohmann::json::array();
  for (const auto& t : ts) arr.push_back(triple_to_json(t));
  return arr;
}

// {doc_id, nodes:[string], edges:[{head, tail, relation}]}
inline nlohmann::json to_json(const ContextGraph& g) {
  auto nodes = nlohmann::json::array();
  for (const auto& n : g.nodes()) nodes.push_back(n.surface);
  return {{"doc_id", g.doc_id()}, {"nodes", nodes}, {"edges", triples_to_json(g.edges())}};
}

inline ContextGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("edges") || !j.at("edges").is_array()) {
    fail(ErrorKind::kData, "graph object needs an edges array");
  }
  std::vector<Triple> triples;
  for (const auto& e : j.at("edges")) triples.push_back(triple_from_json(e));
  return build_graph(triples, j.value("doc_id", std::string{}));
}

}  // namespace factcg::graph
