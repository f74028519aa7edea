#pragma once

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <string>
#include <vector>

#include "factcg/error.hpp"
#include "factcg/eval/scorer.hpp"

namespace factcg::eval {

struct HttpScorerOptions {
  std::string endpoint;  // scheme://host[:port] of the scorer service
  std::size_t max_batch = 32;
  int timeout_seconds = 300;
};

// Client for the scorer service.
//   POST /score {pairs:[{doc, claim}], mode:"confidence"|"nli"}
//     -> {scores:[number]} | {labels:["Entailment"|"Contradiction"|"Neutral"]}, model_name
//   POST /score {texts:[string], mode:"tokens"} -> {token_counts:[int]}
//   GET /healthz -> {status, model_name}
// Batches are split client-side at max_batch; replies must match request
// order and length.
class HttpScorer final : public Scorer {
 public:
  explicit HttpScorer(HttpScorerOptions options) : options_(std::move(options)) {
    require(!options_.endpoint.empty(), ErrorKind::kConfig, "scorer endpoint is empty");
    require(options_.max_batch >= 1, ErrorKind::kConfig, "scorer max_batch must be >= 1");
  }

  std::string name() const override { return model_name_.empty() ? "http-scorer" : model_name_; }

  // {status, model_name} from /healthz; throws kScoringFailed when down.
  nlohmann::json health() {
    httplib::Client client(options_.endpoint);
    client.set_read_timeout(options_.timeout_seconds);
    auto res = client.Get("/healthz");
    if (!res || res->status != 200) fail(ErrorKind::kScoringFailed, "scorer /healthz not ready");
    auto j = parse(res->body);
    model_name_ = j.value("model_name", std::string{});
    return j;
  }

  double score(std::string_view doc, std::string_view claim) override {
    TextPair p{std::string(doc), std::string(claim)};
    return score_batch(std::span<const TextPair>(&p, 1)).front();
  }

  std::vector<double> score_batch(std::span<const TextPair> pairs) override {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); i += options_.max_batch) {
      auto batch = pairs.subspan(i, std::min(options_.max_batch, pairs.size() - i));
      auto reply = post(pairs_body(batch, "confidence"));
      const auto& scores = field_of_size(reply, "scores", batch.size());
      for (const auto& s : scores) {
        double v = s.get<double>();
        if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::kScoringFailed, "score outside [0,1]");
        out.push_back(v);
      }
    }
    return out;
  }

  std::optional<NliLabel> nli_label(std::string_view doc, std::string_view claim) override {
    TextPair p{std::string(doc), std::string(claim)};
    auto reply = post(pairs_body(std::span<const TextPair>(&p, 1), "nli"));
    auto label = parse_nli_label(field_of_size(reply, "labels", 1).at(0).get<std::string>());
    if (!label) fail(ErrorKind::kScoringFailed, "unknown NLI label from scorer");
    return label;
  }

  bool counts_tokens() const override { return true; }

  std::size_t token_count(std::string_view text) override {
    nlohmann::json body = {{"mode", "tokens"}, {"texts", nlohmann::json::array({std::string(text)})}};
    auto reply = post(body);
    return field_of_size(reply, "token_counts", 1).at(0).get<std::size_t>();
  }

 private:
  static nlohmann::json parse(const std::string& body) {
    try {
      return nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kScoringFailed, std::string("malformed scorer reply: ") + e.what());
    }
  }

  static nlohmann::json pairs_body(std::span<const TextPair> pairs, std::string_view mode) {
    auto arr = nlohmann::json::array();
    for (const auto& p : pairs) arr.push_back({{"doc", p.doc}, {"claim", p.claim}});
    return {{"mode", mode}, {"pairs", arr}};
  }

  static const nlohmann::json& field_of_size(const nlohmann::json& reply, const char* key,
                                             std::size_t n) {
    if (!reply.contains(key) || !reply.at(key).is_array() || reply.at(key).size() != n) {
      fail(ErrorKind::kScoringFailed,
           std::string("scorer reply field '") + key + "' missing or wrong length");
    }
    return reply.at(key);
  }

  nlohmann::json post(const nlohmann::json& body) {
    httplib::Client client(options_.endpoint);
    client.set_read_timeout(options_.timeout_seconds);
    auto res = client.Post("/score", body.dump(), "application/json");
    if (!res) fail(ErrorKind::kScoringFailed, "scorer unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200) {
      fail(ErrorKind::kScoringFailed, "scorer HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    auto j = parse(res->body);
    if (j.contains("model_name") && j.at("model_name").is_string()) {
      model_name_ = j.at("model_name").get<std::string>();
    }
    return j;
  }

  HttpScorerOptions options_;
  std::string model_name_;
};

}  // namespace factcg::eval
