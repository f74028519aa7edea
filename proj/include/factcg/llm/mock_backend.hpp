#pragma once

#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "factcg/digest.hpp"
#include "factcg/error.hpp"
#include "factcg/io/files.hpp"
#include "factcg/llm/gateway.hpp"

namespace factcg::llm {

// Offline backend answering from fixtures. Lookup order: exact prompt digest
// (sha256 of the prompt bytes), then the first rule whose tag matches (empty
// tag matches anything) and whose `contains` substrings all occur in the
// prompt. A miss is a final BackendError with status 404.
//
// Fixture file: {"completions": {"<sha256(prompt)>": "text"},
//                "rules": [{"tag": "cg_doc", "contains": ["..."], "text": "..."}]}
class MockBackend final : public Backend {
 public:
  struct Rule {
    std::string tag;
    std::vector<std::string> contains;
    std::string text;
  };

  MockBackend() = default;

  static MockBackend from_json(const nlohmann::json& j) {
    MockBackend m;
    if (j.contains("completions")) {
      for (const auto& [digest, text] : j.at("completions").items()) {
        m.add_completion(digest, text.get<std::string>());
      }
    }
    if (j.contains("rules")) {
      for (const auto& r : j.at("rules")) {
        m.add_rule(Rule{r.value("tag", std::string{}),
                        r.value("contains", std::vector<std::string>{}),
                        r.at("text").get<std::string>()});
      }
    }
    return m;
  }

  static MockBackend from_file(const std::filesystem::path& path) {
    try {
      return from_json(nlohmann::json::parse(io::read_file(path)));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kData, "mock fixture " + path.string() + ": " + e.what());
    }
  }

  MockBackend(MockBackend&& other) noexcept
      : completions_(std::move(other.completions_)), rules_(std::move(other.rules_)) {}

  void add_completion(std::string prompt_digest, std::string text) {
    completions_[std::move(prompt_digest)] = std::move(text);
  }
  void add_completion_for_prompt(std::string_view prompt, std::string text) {
    add_completion(sha256_hex(prompt), std::move(text));
  }
  void add_rule(Rule rule) { rules_.push_back(std::move(rule)); }

  std::string name() const override { return "mock"; }

  std::string complete(const CompletionRequest& request) override {
    ++calls_;
    auto it = completions_.find(sha256_hex(request.prompt));
    if (it != completions_.end()) return it->second;
    for (const auto& rule : rules_) {
      if (!rule.tag.empty() && rule.tag != request.request_tag) continue;
      bool all = true;
      for (const auto& needle : rule.contains) {
        if (request.prompt.find(needle) == std::string::npos) {
          all = false;
          break;
        }
      }
      if (all) return rule.text;
    }
    throw Error(ErrorKind::kBackendError,
                "no mock fixture for " + request.request_tag + " prompt " +
                    sha256_hex(request.prompt).substr(0, 12),
                404);
  }

  std::size_t calls() const { return calls_.load(); }

 private:
  std::map<std::string, std::string> completions_;
  std::vector<Rule> rules_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace factcg::llm
