#pragma once

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <string>

#include "factcg/error.hpp"
#include "factcg/llm/gateway.hpp"

namespace factcg::llm {

struct HttpBackendOptions {
  std::string endpoint;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string auth_header = "Authorization";
  std::string auth_prefix = "Bearer ";
  std::string api_key;
  int timeout_seconds = 120;
};

// Chat-completions style POST:
//   {model, messages:[{role:"user", content:prompt}], temperature, max_tokens}
// reading choices[0].message.content from the reply.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
    require(!options_.endpoint.empty(), ErrorKind::kConfig, "http backend needs an endpoint");
  }

  std::string name() const override { return "http:" + options_.endpoint; }

  std::string complete(const CompletionRequest& request) override {
    httplib::Client client(options_.endpoint);
    client.set_connection_timeout(options_.timeout_seconds);
    client.set_read_timeout(options_.timeout_seconds);
    httplib::Headers headers;
    if (!options_.api_key.empty()) {
      headers.emplace(options_.auth_header, options_.auth_prefix + options_.api_key);
    }
    nlohmann::json body = {
        {"model", request.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };
    auto res = client.Post(options_.path, headers, body.dump(), "application/json");
    if (!res) throw TransportError(httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) throw HttpStatusError(res->status, res->body);
    try {
      auto reply = nlohmann::json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kBackendError, std::string("malformed completion reply: ") + e.what(),
                  res->status);
    }
  }

 private:
  HttpBackendOptions options_;
};

}  // namespace factcg::llm
