#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "factcg/error.hpp"
#include "factcg/llm/gateway.hpp"
#include "factcg/prompt/parse.hpp"
#include "factcg/prompt/templates.hpp"

namespace factcg::llm {

struct ModelParams {
  std::string model = "gpt-4o";
  double temperature = 0.0;
  int max_tokens = 2048;
};

// Template rendering plus completion, with the parse-and-retry-once policy
// for structured outputs.
class PromptClient {
 public:
  PromptClient(Gateway& gateway, const prompt::TemplateRegistry& templates, ModelParams params = {})
      : gateway_(gateway), templates_(templates), params_(std::move(params)) {}

  const prompt::TemplateRegistry& templates() const { return templates_; }
  const prompt::Delimiters& delimiters() const { return templates_.delimiters(); }
  const ModelParams& params() const { return params_; }

  std::string complete(prompt::TemplateId id, const prompt::Slots& slots,
                       const std::function<bool(std::string_view)>& accept = {}) const {
    CompletionRequest req{params_.model, templates_.render(id, slots), params_.temperature,
                          params_.max_tokens, std::string(prompt::to_string(id))};
    return gateway_.complete(req, accept).text;
  }

  // Parses the completion with `parse`; an unparseable completion is not
  // cached and the identical prompt is sent once more. The second failure
  // propagates.
  template <typename Parse>
  auto complete_parsed(prompt::TemplateId id, const prompt::Slots& slots, Parse&& parse) const {
    auto accept = [&parse](std::string_view text) {
      try {
        parse(text);
        return true;
      } catch (const Error&) {
        return false;
      }
    };
    std::string text = complete(id, slots, accept);
    try {
      return parse(text);
    } catch (const Error&) {
      text = complete(id, slots, accept);
      return parse(text);
    }
  }

  prompt::ParsedTriples extract_doc_triples(std::string_view doc) const {
    return complete_parsed(prompt::TemplateId::kCgDoc, {{"SENTENCES", std::string(doc)}},
                           [this](std::string_view t) {
                             return prompt::parse_triples_doc(t, delimiters());
                           });
  }

  prompt::ParsedTriples extract_mhqa_triples(std::string_view sentences) const {
    return complete_parsed(prompt::TemplateId::kCgMhqa, {{"SENTENCES", std::string(sentences)}},
                           [](std::string_view t) { return prompt::parse_triples_mhqa(t); });
  }

  // No retry here; an empty completion is simply not cached.
  std::string complete_single_text(prompt::TemplateId id, const prompt::Slots& slots) const {
    auto accept = [](std::string_view t) {
      try {
        prompt::parse_single_text(t);
        return true;
      } catch (const Error&) {
        return false;
      }
    };
    return prompt::parse_single_text(complete(id, slots, accept));
  }

 private:
  Gateway& gateway_;
  const prompt::TemplateRegistry& templates_;
  ModelParams params_;
};

}  // namespace factcg::llm
