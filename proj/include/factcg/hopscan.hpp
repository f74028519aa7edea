#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "factcg/digest.hpp"
#include "factcg/error.hpp"
#include "factcg/graph/context_graph.hpp"
#include "factcg/graph/subgraph.hpp"
#include "factcg/llm/prompting.hpp"
#include "factcg/parallel.hpp"
#include "factcg/prompt/parse.hpp"
#include "factcg/random.hpp"

namespace factcg::hopscan {

using graph::ContextGraph;
using graph::Triple;

// "(head <t> tail <t> relation)" per line, the layout the mapping prompt shows.
inline std::string serialize_graph_triples(const ContextGraph& g, const prompt::Delimiters& d) {
  std::string out;
  for (const auto& t : g.edges()) {
    if (!out.empty()) out += '\n';
    out += "(" + prompt::format_triple_doc(t, d) + ")";
  }
  return out;
}

struct MappedClaim {
  std::vector<Triple> triples;     // graph edges asserted by the claim
  std::size_t hallucinated = 0;    // returned triples absent from the graph
};

// Asks the model which graph triples the claim asserts and keeps only those
// that match a graph edge under normalized EdgeKey equality.
inline MappedClaim map_claim_subgraph(const ContextGraph& g, std::string_view claim,
                                      const llm::PromptClient& client) {
  require(g.edge_count() > 0, ErrorKind::kPrecondition, "map_claim_subgraph on empty graph");
  require(!text::trim(claim).empty(), ErrorKind::kPrecondition, "claim is empty");
  auto parsed = client.complete_parsed(
      prompt::TemplateId::kSubgraphMap,
      {{"TRIPLES", serialize_graph_triples(g, client.delimiters())}, {"SENTENCES", std::string(claim)}},
      [&client](std::string_view t) { return prompt::parse_triples_doc(t, client.delimiters()); });
  MappedClaim out;
  std::vector<std::size_t> seen;
  for (const Triple& t : parsed.flatten()) {
    auto idx = g.find_edge(t);
    if (!idx) {
      ++out.hallucinated;
      continue;
    }
    if (std::find(seen.begin(), seen.end(), *idx) != seen.end()) continue;
    seen.push_back(*idx);
    out.triples.push_back(g.edges()[*idx]);
  }
  return out;
}

// Buckets 1, 2, 3, 4 and >=5 hops.
struct HopHistogram {
  std::array<std::size_t, 5> counts{};
  std::size_t total = 0;
  std::size_t dropped = 0;
  std::size_t hallucinated_triples = 0;
  std::map<std::string, std::size_t> drop_reasons;

  static std::size_t bucket_of(int hops) {
    require(hops >= 1, ErrorKind::kContractViolation, "hop count must be >= 1");
    return static_cast<std::size_t>(std::min(hops, 5) - 1);
  }

  void add(int hops) {
    ++counts[bucket_of(hops)];
    ++total;
  }

  static constexpr std::array<std::string_view, 5> kLabels = {"1", "2", "3", "4", ">=5"};

  // count/total as a percentage rounded to one decimal; 0 for an empty histogram.
  double percent(std::size_t bucket) const {
    if (total == 0) return 0.0;
    return std::round(1000.0 * static_cast<double>(counts[bucket]) / static_cast<double>(total)) / 10.0;
  }

  nlohmann::json to_json() const {
    nlohmann::json buckets = nlohmann::json::object();
    nlohmann::json pct = nlohmann::json::object();
    for (std::size_t i = 0; i < counts.size(); ++i) {
      buckets[std::string(kLabels[i])] = counts[i];
      pct[std::string(kLabels[i])] = percent(i);
    }
    return {{"buckets", buckets},   {"percentages", pct}, {"total", total},
            {"dropped", dropped},   {"drop_reasons", drop_reasons},
            {"hallucinated_triples", hallucinated_triples}};
  }

  // Row layout: one line per hop bucket, value column right-aligned.
  std::string table(std::string_view column = "Claims") const {
    static constexpr std::array<std::string_view, 5> kRows = {"1-hop", "2-hop", "3-hop", "4-hop",
                                                              ">= 5-hop"};
    std::string out;
    char line[128];
    std::snprintf(line, sizeof line, "%-10s| %10.*s\n", "Hops", static_cast<int>(column.size()),
                  column.data());
    out += line;
    out += std::string(10, '-') + "+" + std::string(11, '-') + "\n";
    for (std::size_t i = 0; i < kRows.size(); ++i) {
      std::snprintf(line, sizeof line, "%-10.*s| %9.1f%%\n", static_cast<int>(kRows[i].size()),
                    kRows[i].data(), percent(i));
      out += line;
    }
    return out;
  }
};

struct ClaimPair {
  std::string doc;
  std::string claim;
};

struct HopScanOptions {
  std::size_t sample_size = 500;
  std::uint64_t seed = 13;
  std::size_t workers = 4;
};

// Deduplicates documents, samples up to sample_size of them, extracts each
// sampled document's graph once, maps each of its claims, and buckets the
// largest connected component's edge count per claim.
inline HopHistogram hop_distribution(std::span<const ClaimPair> corpus,
                                     const llm::PromptClient& client, const HopScanOptions& opt) {
  std::vector<std::string> doc_keys;
  std::map<std::string, std::size_t> doc_index;
  std::vector<std::size_t> claim_doc(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto key = sha256_hex(corpus[i].doc);
    auto [it, inserted] = doc_index.try_emplace(key, doc_keys.size());
    if (inserted) doc_keys.push_back(key);
    claim_doc[i] = it->second;
  }
  Rng rng(derive_seed(opt.seed, "hopscan:docs"));
  auto sampled = rng.sample_indices(doc_keys.size(), opt.sample_size);
  std::vector<bool> in_sample(doc_keys.size(), false);
  for (std::size_t d : sampled) in_sample[d] = true;

  std::vector<std::size_t> first_claim(doc_keys.size(), corpus.size());
  for (std::size_t i = corpus.size(); i-- > 0;) first_claim[claim_doc[i]] = i;

  std::vector<std::optional<ContextGraph>> graphs(doc_keys.size());
  parallel_for(sampled.size(), opt.workers, [&](std::size_t s) {
    std::size_t d = sampled[s];
    try {
      auto parsed = client.extract_doc_triples(corpus[first_claim[d]].doc);
      graphs[d] = graph::build_graph(parsed.flatten(), "doc-" + doc_keys[d].substr(0, 16));
    } catch (const Error&) {
    }
  });

  enum class Outcome { kSkipped, kCounted, kNoGraph, kIllFormatted, kEmptyMapping, kBackend };
  std::vector<Outcome> outcome(corpus.size(), Outcome::kSkipped);
  std::vector<int> hops(corpus.size(), 0);
  std::vector<std::size_t> hallucinated(corpus.size(), 0);
  parallel_for(corpus.size(), opt.workers, [&](std::size_t i) {
    std::size_t d = claim_doc[i];
    if (!in_sample[d]) return;
    if (!graphs[d]) {
      outcome[i] = Outcome::kNoGraph;
      return;
    }
    try {
      auto mapped = map_claim_subgraph(*graphs[d], corpus[i].claim, client);
      hallucinated[i] = mapped.hallucinated;
      if (mapped.triples.empty()) {
        outcome[i] = Outcome::kEmptyMapping;
        return;
      }
      hops[i] = graph::largest_component_hops(mapped.triples);
      outcome[i] = Outcome::kCounted;
    } catch (const Error& e) {
      outcome[i] = e.kind() == ErrorKind::kAllRejected ? Outcome::kIllFormatted : Outcome::kBackend;
    }
  });

  HopHistogram h;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    h.hallucinated_triples += hallucinated[i];
    switch (outcome[i]) {
      case Outcome::kSkipped: break;
      case Outcome::kCounted: h.add(hops[i]); break;
      case Outcome::kNoGraph: ++h.dropped; ++h.drop_reasons["graph_extraction_failed"]; break;
      case Outcome::kIllFormatted: ++h.dropped; ++h.drop_reasons["ill_formatted_mapping"]; break;
      case Outcome::kEmptyMapping: ++h.dropped; ++h.drop_reasons["empty_mapping"]; break;
      case Outcome::kBackend: ++h.dropped; ++h.drop_reasons["backend_error"]; break;
    }
  }
  return h;
}

}  // namespace factcg::hopscan
