#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace factcg {

// Runs body(i) for i in [0, n) on up to `workers` threads. The first
// exception escaping a body is rethrown after all workers finish; bodies are
// expected to handle per-item failures themselves.
template <typename Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mu);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

// Thread-safe tally of named events (drop reasons, filter outcomes).
class Counters {
 public:
  void add(const std::string& key, std::size_t n = 1) {
    std::lock_guard lock(mu_);
    counts_[key] += n;
  }
  std::map<std::string, std::size_t> snapshot() const {
    std::lock_guard lock(mu_);
    return counts_;
  }
  std::size_t get(const std::string& key) const {
    std::lock_guard lock(mu_);
    auto it = counts_.find(key);
    return it == counts_.end() ? 0 : it->second;
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::size_t> counts_;
};

}  // namespace factcg
