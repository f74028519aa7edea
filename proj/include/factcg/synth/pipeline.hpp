#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "factcg/error.hpp"
#include "factcg/eval/scorer.hpp"
#include "factcg/graph/context_graph.hpp"
#include "factcg/graph/json.hpp"
#include "factcg/graph/subgraph.hpp"
#include "factcg/hopscan.hpp"
#include "factcg/llm/prompting.hpp"
#include "factcg/parallel.hpp"
#include "factcg/random.hpp"
#include "factcg/synth/records.hpp"
#include "factcg/text.hpp"

namespace factcg::synth {

using graph::ContextGraph;
using graph::Shape;
using graph::Triple;
using prompt::TemplateId;

enum class NliPolicy { kDropIfCorrect, kDropIfIncorrect };

constexpr std::string_view to_string(NliPolicy p) {
  return p == NliPolicy::kDropIfCorrect ? "drop_if_correct" : "drop_if_incorrect";
}

inline std::optional<NliPolicy> parse_nli_policy(std::string_view s) {
  if (s == "drop_if_correct") return NliPolicy::kDropIfCorrect;
  if (s == "drop_if_incorrect") return NliPolicy::kDropIfIncorrect;
  return std::nullopt;
}

struct SynthesisConfig {
  std::vector<int> hops = {3, 4};
  std::vector<Shape> shapes = {Shape::kPath};
  std::size_t max_subgraphs_per_doc = 2;  // per (hops, shape) combination
  double corrupt_fraction = 0.18;
  bool nli_filter = true;
  NliPolicy hotpot_policy = NliPolicy::kDropIfCorrect;
  NliPolicy musique_policy = NliPolicy::kDropIfCorrect;
  std::vector<int> musique_hops = {3, 4};
  bool include_hotpotqa = true;
  bool include_musique = true;
  std::uint64_t seed = 13;
  std::size_t workers = 4;
};

// Stage-qualified reason for a dropped record, e.g. "claim:empty_completion".
inline std::string drop_reason(std::string_view stage, const Error& e) {
  std::string_view why;
  switch (e.kind()) {
    case ErrorKind::kAllRejected: why = "ill_formatted"; break;
    case ErrorKind::kEmptyCompletion: why = "empty_completion"; break;
    case ErrorKind::kCorruptionFailed: why = "corruption_failed"; break;
    case ErrorKind::kPrecondition: why = "precondition_failed"; break;
    case ErrorKind::kBackendError:
    case ErrorKind::kBackendUnavailable: why = "backend_error"; break;
    default: why = to_string(e.kind());
  }
  return std::string(stage) + ":" + std::string(why);
}

inline bool nli_map(eval::NliLabel y) { return y == eval::NliLabel::kEntailment; }

inline std::string qa_to_claim(const MhqaRecord& r, const llm::PromptClient& client) {
  require(!text::trim(r.question).empty() && !text::trim(r.answer).empty(), ErrorKind::kPrecondition,
          "record " + r.id + " needs a question and an answer");
  return client.complete_single_text(TemplateId::kQaToClaim,
                                     {{"QUESTION", r.question}, {"ANSWER", r.answer}});
}

// Rewrites doc so the relation between the triple's endpoints is gone.
inline std::string corrupt_document(std::string_view doc, const Triple& triple,
                                    const llm::PromptClient& client) {
  const std::string norm_doc = text::normalize_key(doc);
  require(norm_doc.find(text::normalize_key(triple.head)) != std::string::npos &&
              norm_doc.find(text::normalize_key(triple.tail)) != std::string::npos,
          ErrorKind::kPrecondition, "triple endpoints do not occur in the document");
  std::string out = client.complete_single_text(
      TemplateId::kRelationRemoval,
      {{"ENTITIES", triple.head + ", " + triple.tail}, {"SENTENCES", std::string(doc)}});
  if (text::collapse_whitespace(out) == text::collapse_whitespace(doc)) {
    fail(ErrorKind::kCorruptionFailed, "rewrite left the document unchanged");
  }
  return out;
}

// ---------------------------------------------------------------- doc pipeline

inline std::string subgraph_tag(int hops, Shape shape, std::size_t index) {
  return "h" + std::to_string(hops) + "-" + std::string(graph::to_string(shape)) + "-" +
         std::to_string(index);
}

// Positive/negative pairs for one document. Per-record failures are counted
// in `drops`; a pair whose negative fails is dropped whole so the output
// stays 1:1.
inline std::vector<SampleRecord> gen_doc_pairs(const DocRecord& doc, const SynthesisConfig& cfg,
                                               const llm::PromptClient& client, Counters& drops) {
  require(!text::trim(doc.doc).empty(), ErrorKind::kPrecondition, "doc " + doc.id + " is empty");
  std::vector<SampleRecord> out;

  std::optional<ContextGraph> g;
  try {
    auto parsed = client.extract_doc_triples(doc.doc);
    g = graph::drop_cyclic_components(graph::build_graph(parsed.flatten(), doc.id));
  } catch (const Error& e) {
    drops.add(drop_reason("graph", e));
    return out;
  }
  if (!g) {
    drops.add("graph:all_components_cyclic");
    return out;
  }

  for (int hops : cfg.hops) {
    for (Shape shape : cfg.shapes) {
      auto all = graph::enumerate_subgraphs(*g, hops, shape);
      auto tag = "h" + std::to_string(hops) + "-" + std::string(graph::to_string(shape));
      auto picked = graph::sample_subgraphs(std::move(all), cfg.max_subgraphs_per_doc,
                                            derive_seed(cfg.seed, "subgraphs:" + doc.id + ":" + tag));
      for (std::size_t k = 0; k < picked.size(); ++k) {
        const auto& sub = picked[k];
        const std::string pair_id = doc.id + "/" + subgraph_tag(hops, shape, k);
        const std::uint64_t edge_seed = derive_seed(cfg.seed, "edge:" + pair_id);
        std::string claim;
        try {
          claim = client.complete_single_text(
              TemplateId::kClaimFromGraph,
              {{"ENTITIES", text::join(graph::entity_surfaces(sub.edges), ", ")}, {"SENTENCES", doc.doc}});
        } catch (const Error& e) {
          drops.add(drop_reason("claim", e));
          continue;
        }
        const Triple removed = graph::pick_edge(sub, edge_seed);
        std::string neg_doc;
        try {
          neg_doc = corrupt_document(doc.doc, removed, client);
        } catch (const Error& e) {
          drops.add(drop_reason("corrupt", e));
          continue;
        }

        nlohmann::json meta = {{"subgraph", graph::triples_to_json(sub.edges)},
                               {"shape", graph::to_string(shape)},
                               {"seed", edge_seed}};
        const int h = graph::largest_component_hops(sub.edges);
        SampleRecord pos{pair_id + "/pos", doc.doc, claim, 1, Source::kCg2cDoc, h, pair_id, meta};
        meta["removed_triple"] = graph::triple_to_json(removed);
        SampleRecord neg{pair_id + "/neg", std::move(neg_doc), claim, 0, Source::kCg2cDoc, h, pair_id,
                         std::move(meta)};
        out.push_back(std::move(pos));
        out.push_back(std::move(neg));
      }
    }
  }
  if (out.empty()) drops.add("doc:no_pairs");
  return out;
}

inline void sort_by_id(std::vector<SampleRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const SampleRecord& a, const SampleRecord& b) { return a.id < b.id; });
}

struct SourceCounts {
  std::size_t positive = 0;
  std::size_t negative = 0;
};

inline std::map<std::string, SourceCounts> count_by_source(std::span<const SampleRecord> records) {
  std::map<std::string, SourceCounts> out;
  for (const auto& r : records) {
    auto& c = out[std::string(to_string(r.source))];
    (r.label == 1 ? c.positive : c.negative)++;
  }
  return out;
}

inline nlohmann::json counts_json(const std::map<std::string, SourceCounts>& counts) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [src, c] : counts) j[src] = {{"positive", c.positive}, {"negative", c.negative}};
  return j;
}

struct RunResult {
  std::vector<SampleRecord> records;  // sorted by id
  nlohmann::json stats;               // counts and drop reasons for the manifest
};

inline RunResult gen_doc_corpus(std::span<const DocRecord> docs, const SynthesisConfig& cfg,
                                const llm::PromptClient& client) {
  Counters drops;
  std::vector<std::vector<SampleRecord>> per_doc(docs.size());
  parallel_for(docs.size(), cfg.workers, [&](std::size_t i) {
    if (text::trim(docs[i].doc).empty()) {
      drops.add("doc:empty");
      return;
    }
    per_doc[i] = gen_doc_pairs(docs[i], cfg, client, drops);
  });
  RunResult r;
  for (auto& v : per_doc) std::move(v.begin(), v.end(), std::back_inserter(r.records));
  sort_by_id(r.records);
  r.stats = {{"documents", docs.size()},
             {"counts", counts_json(count_by_source(r.records))},
             {"drops", drops.snapshot()}};
  return r;
}

// --------------------------------------------------------------- mhqa pipeline

// Number of negatives m for n positives so that m / (n + m) is closest to
// `fraction`; ties go to the smaller m.
inline std::size_t corruption_count(std::size_t n, double fraction) {
  require(fraction >= 0.0 && fraction < 1.0, ErrorKind::kContractViolation,
          "corrupt_fraction must be in [0, 1)");
  std::size_t best = 0;
  double best_err = fraction;
  for (std::size_t m = 1; m <= n; ++m) {
    double err = std::abs(static_cast<double>(m) / static_cast<double>(n + m) - fraction);
    if (err < best_err - 1e-12) {
      best = m;
      best_err = err;
    }
  }
  return best;
}

struct NliFilterResult {
  std::vector<SampleRecord> kept;
  std::size_t dropped = 0;
  std::size_t flagged = 0;  // scorer had no label; record kept
};

// Drops records the baseline NLI model gets right (or wrong, per policy).
// Records are never edited apart from the "nli_unscored" flag.
inline NliFilterResult nli_filter(std::vector<SampleRecord> samples, eval::Scorer& scorer,
                                  NliPolicy policy) {
  NliFilterResult out;
  for (auto& s : samples) {
    std::optional<eval::NliLabel> y;
    try {
      y = scorer.nli_label(s.doc, s.claim);
    } catch (const std::exception&) {
      y.reset();
    }
    if (!y) {
      s.meta["nli_unscored"] = true;
      ++out.flagged;
      out.kept.push_back(std::move(s));
      continue;
    }
    const bool correct = static_cast<int>(nli_map(*y)) == s.label;
    const bool drop = policy == NliPolicy::kDropIfCorrect ? correct : !correct;
    if (drop) {
      ++out.dropped;
    } else {
      out.kept.push_back(std::move(s));
    }
  }
  return out;
}

inline RunResult gen_mhqa_pairs(std::span<const MhqaRecord> records, const SynthesisConfig& cfg,
                                const llm::PromptClient& client, eval::Scorer* nli_scorer) {
  Counters drops;
  const std::set<int> musique_hops(cfg.musique_hops.begin(), cfg.musique_hops.end());

  // Phase 1: admission and claims.
  std::vector<std::optional<SampleRecord>> base(records.size());
  parallel_for(records.size(), cfg.workers, [&](std::size_t i) {
    const MhqaRecord& r = records[i];
    const std::string prefix(to_string(r.source));
    if ((r.source == Source::kHotpotQa && !cfg.include_hotpotqa) ||
        (r.source == Source::kMusique && !cfg.include_musique)) {
      return;
    }
    if (text::trim(r.doc).empty() || !supports_are_verbatim(r)) {
      drops.add(prefix + ":invalid_record");
      return;
    }
    if (r.source == Source::kMusique &&
        (!r.declared_hops || musique_hops.count(*r.declared_hops) == 0)) {
      drops.add(prefix + ":hops_filtered");
      return;
    }
    if (r.source == Source::kHotpotQa && !r.answerable) {
      drops.add(prefix + ":unanswerable");
      return;
    }
    std::string claim;
    try {
      claim = qa_to_claim(r, client);
    } catch (const Error& e) {
      drops.add(prefix + ":" + drop_reason("claim", e));
      return;
    }
    const int label = r.answerable ? 1 : 0;
    SampleRecord s{r.id + (label == 1 ? "/pos" : "/neg"), r.doc, std::move(claim), label, r.source,
                   r.declared_hops, std::nullopt, nlohmann::json::object()};
    if (r.source == Source::kHotpotQa) s.pair_id = r.id;
    base[i] = std::move(s);
  });

  // Phase 2: seeded choice of HotpotQA positives to corrupt.
  std::vector<std::size_t> hotpot;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (base[i] && base[i]->source == Source::kHotpotQa) hotpot.push_back(i);
  }
  std::sort(hotpot.begin(), hotpot.end(),
            [&](std::size_t a, std::size_t b) { return records[a].id < records[b].id; });
  const std::size_t m = corruption_count(hotpot.size(), cfg.corrupt_fraction);
  Rng pick(derive_seed(cfg.seed, "hotpotqa:corrupt"));
  std::vector<std::size_t> chosen;
  for (std::size_t k : pick.sample_indices(hotpot.size(), m)) chosen.push_back(hotpot[k]);

  // Phase 3: G_s, G_c, edge removal.
  std::vector<std::optional<SampleRecord>> negatives(chosen.size());
  parallel_for(chosen.size(), cfg.workers, [&](std::size_t c) {
    const MhqaRecord& r = records[chosen[c]];
    const SampleRecord& pos = *base[chosen[c]];
    const std::uint64_t edge_seed = derive_seed(cfg.seed, "edge:" + r.id);
    try {
      const std::string support = r.supporting_sentences.empty()
                                      ? r.doc
                                      : text::join(r.supporting_sentences, "\n");
      auto parsed = client.extract_mhqa_triples(support);
      auto gs = graph::build_graph(parsed.flatten(), r.id);
      auto gc = hopscan::map_claim_subgraph(gs, pos.claim, client);
      if (gc.triples.empty()) {
        drops.add("hotpotqa:map:empty_mapping");
        return;
      }
      const Triple removed = graph::pick_edge(gc.triples, edge_seed);
      std::string neg_doc = corrupt_document(r.doc, removed, client);
      nlohmann::json meta = {{"subgraph", graph::triples_to_json(gc.triples)},
                             {"removed_triple", graph::triple_to_json(removed)},
                             {"seed", edge_seed}};
      negatives[c] = SampleRecord{r.id + "/neg", std::move(neg_doc), pos.claim, 0, Source::kHotpotQa,
                                  graph::largest_component_hops(gc.triples), r.id, std::move(meta)};
    } catch (const Error& e) {
      drops.add("hotpotqa:" + drop_reason("negative", e));
    }
  });

  std::vector<SampleRecord> hotpot_recs;
  std::vector<SampleRecord> musique_recs;
  for (auto& b : base) {
    if (!b) continue;
    (b->source == Source::kHotpotQa ? hotpot_recs : musique_recs).push_back(std::move(*b));
  }
  for (auto& n : negatives) {
    if (n) hotpot_recs.push_back(std::move(*n));
  }

  std::vector<SampleRecord> generated;
  generated.insert(generated.end(), hotpot_recs.begin(), hotpot_recs.end());
  generated.insert(generated.end(), musique_recs.begin(), musique_recs.end());
  auto generated_counts = count_by_source(generated);
  const auto& hc = generated_counts["hotpotqa"];
  const double hotpot_neg_fraction =
      hc.positive + hc.negative == 0
          ? 0.0
          : static_cast<double>(hc.negative) / static_cast<double>(hc.positive + hc.negative);

  nlohmann::json nli = {{"enabled", cfg.nli_filter && nli_scorer != nullptr}};
  RunResult r;
  if (cfg.nli_filter && nli_scorer != nullptr) {
    auto fh = nli_filter(std::move(hotpot_recs), *nli_scorer, cfg.hotpot_policy);
    auto fm = nli_filter(std::move(musique_recs), *nli_scorer, cfg.musique_policy);
    nli["hotpotqa"] = {{"policy", to_string(cfg.hotpot_policy)}, {"dropped", fh.dropped}, {"flagged", fh.flagged}};
    nli["musique"] = {{"policy", to_string(cfg.musique_policy)}, {"dropped", fm.dropped}, {"flagged", fm.flagged}};
    r.records = std::move(fh.kept);
    std::move(fm.kept.begin(), fm.kept.end(), std::back_inserter(r.records));
  } else {
    r.records = std::move(generated);
    generated.clear();
  }
  sort_by_id(r.records);
  r.stats = {{"records", records.size()},
             {"hotpotqa_corrupt_target", m},
             {"hotpotqa_negative_fraction", hotpot_neg_fraction},
             {"generated", counts_json(generated_counts)},
             {"counts", counts_json(count_by_source(r.records))},
             {"nli_filter", nli},
             {"drops", drops.snapshot()}};
  return r;
}

}  // namespace factcg::synth
