#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <system_error>

#include "factcg/digest.hpp"
#include "factcg/error.hpp"

namespace factcg::llm {

struct CompletionRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::string request_tag;  // template id, audit only; not part of the cache key
};

struct CompletionResult {
  std::string text;
  std::string backend_name;
  bool cache_hit = false;
  double latency_ms = 0.0;
};

inline void validate(const CompletionRequest& r) {
  require(!r.prompt.empty(), ErrorKind::kContractViolation, "completion prompt is empty");
  require(r.max_tokens >= 1, ErrorKind::kContractViolation, "max_tokens must be >= 1");
  require(r.temperature >= 0.0, ErrorKind::kContractViolation, "temperature must be >= 0");
}

// Shortest round-trip decimal, identical on every IEEE-754 platform.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) fail(ErrorKind::kContractViolation, "unformattable double");
  return std::string(buf, end);
}

// SHA-256 hex over length-prefixed (model, prompt, temperature, max_tokens).
inline std::string cache_key(const CompletionRequest& r) {
  return Sha256()
      .field("factcg.completion.v1")
      .field(r.model)
      .field(r.prompt)
      .field(format_double(r.temperature))
      .field(std::to_string(r.max_tokens))
      .hex();
}

// Retryable failure: no response from the backend.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Retryable failure: the backend answered with a non-2xx status.
class HttpStatusError : public std::runtime_error {
 public:
  HttpStatusError(int status, const std::string& body)
      : std::runtime_error("HTTP " + std::to_string(status) + ": " + body), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace factcg::llm
