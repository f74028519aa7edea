#pragma once

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "factcg/error.hpp"
#include "factcg/io/files.hpp"
#include "factcg/llm/request.hpp"
#include "factcg/random.hpp"

namespace factcg::llm {

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  // Throws TransportError / HttpStatusError for retryable failures; any
  // factcg::Error is final.
  virtual std::string complete(const CompletionRequest& request) = 0;
};

class CompletionCache {
 public:
  virtual ~CompletionCache() = default;
  virtual std::optional<std::string> get(const std::string& key) const = 0;
  // Append-only: an existing entry is never replaced.
  virtual void put(const std::string& key, const CompletionRequest& request,
                   const std::string& text) = 0;
};

class MemoryCache final : public CompletionCache {
 public:
  std::optional<std::string> get(const std::string& key) const override {
    std::shared_lock lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }
  void put(const std::string& key, const CompletionRequest&, const std::string& text) override {
    std::unique_lock lock(mu_);
    entries_.emplace(key, text);
  }

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, std::string> entries_;
};

// One JSON file per key: {digest, text, created_at, model, request_tag}.
// Entries are published by atomic rename, so concurrent writers of the same
// key leave one intact record.
class DirectoryCache final : public CompletionCache {
 public:
  explicit DirectoryCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  std::optional<std::string> get(const std::string& key) const override {
    auto path = entry_path(key);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    try {
      auto j = nlohmann::json::parse(io::read_file(path));
      if (j.value("digest", std::string{}) != key) return std::nullopt;
      return j.at("text").get<std::string>();
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  void put(const std::string& key, const CompletionRequest& request,
           const std::string& text) override {
    auto path = entry_path(key);
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) return;
    nlohmann::json j = {{"digest", key},
                        {"text", text},
                        {"created_at", static_cast<long long>(std::time(nullptr))},
                        {"model", request.model},
                        {"request_tag", request.request_tag}};
    io::write_file_atomic(path, io::to_pretty(j));
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path entry_path(const std::string& key) const { return dir_ / (key + ".json"); }
  std::filesystem::path dir_;
};

struct RetryPolicy {
  int max_retries = 3;
  std::vector<std::chrono::milliseconds> backoff = {std::chrono::milliseconds(1000),
                                                    std::chrono::milliseconds(2000),
                                                    std::chrono::milliseconds(4000)};
  double jitter = 0.25;  // +-fraction of each backoff step
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
};

// Cached, retrying, concurrency-bounded front for a completion backend.
class Gateway {
 public:
  Gateway(std::unique_ptr<Backend> backend, std::unique_ptr<CompletionCache> cache,
          RetryPolicy retry = {}, int max_in_flight = 4)
      : backend_(std::move(backend)),
        cache_(cache ? std::move(cache) : std::make_unique<MemoryCache>()),
        retry_(std::move(retry)),
        slots_(max_in_flight < 1 ? 1 : max_in_flight) {
    require(backend_ != nullptr, ErrorKind::kContractViolation, "gateway needs a backend");
  }

  // `accept` gates caching: a completion it rejects is returned but not
  // stored, so a retry of the same request reaches the backend again.
  CompletionResult complete(const CompletionRequest& request,
                            const std::function<bool(std::string_view)>& accept = {}) {
    validate(request);
    const auto start = std::chrono::steady_clock::now();
    const std::string key = cache_key(request);
    if (auto hit = cache_->get(key)) {
      return CompletionResult{std::move(*hit), backend_->name(), true, elapsed_ms(start)};
    }

    std::string text = call_with_retry(request, key);
    if (!accept || accept(text)) cache_->put(key, request, text);
    return CompletionResult{std::move(text), backend_->name(), false, elapsed_ms(start)};
  }

  std::size_t backend_calls() const { return calls_.load(); }
  const Backend& backend() const { return *backend_; }

 private:
  static double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }

  std::string call_with_retry(const CompletionRequest& request, const std::string& key) {
    // Jitter is drawn from the request digest: no entropy source involved.
    Rng jitter_rng(fnv1a64(key));
    int last_status = 0;
    bool saw_status = false;
    std::string last_message;
    for (int attempt = 0; attempt <= retry_.max_retries; ++attempt) {
      if (attempt > 0) {
        auto step = retry_.backoff.empty()
                        ? std::chrono::milliseconds(0)
                        : retry_.backoff[std::min<std::size_t>(attempt - 1, retry_.backoff.size() - 1)];
        double scale = 1.0 + retry_.jitter * (2.0 * jitter_rng.uniform01() - 1.0);
        retry_.sleep(std::chrono::milliseconds(static_cast<long long>(step.count() * scale)));
      }
      try {
        SlotGuard guard(slots_);
        ++calls_;
        return backend_->complete(request);
      } catch (const HttpStatusError& e) {
        saw_status = true;
        last_status = e.status();
        last_message = e.what();
      } catch (const TransportError& e) {
        last_message = e.what();
      }
    }
    if (saw_status) {
      throw Error(ErrorKind::kBackendError,
                  backend_->name() + " failed after retries: " + last_message, last_status);
    }
    fail(ErrorKind::kBackendUnavailable, backend_->name() + " unreachable: " + last_message);
  }

  struct SlotGuard {
    explicit SlotGuard(std::counting_semaphore<>& s) : sem(s) { sem.acquire(); }
    ~SlotGuard() { sem.release(); }
    std::counting_semaphore<>& sem;
  };

  std::unique_ptr<Backend> backend_;
  std::unique_ptr<CompletionCache> cache_;
  RetryPolicy retry_;
  std::counting_semaphore<> slots_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace factcg::llm
