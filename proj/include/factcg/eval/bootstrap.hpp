#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "factcg/error.hpp"
#include "factcg/eval/metrics.hpp"
#include "factcg/random.hpp"

namespace factcg::eval {

struct BootstrapOptions {
  int runs = 100;
  std::size_t sample_size = 150;
  std::uint64_t seed = 0;
  int max_redraws = 20;  // per run, for resamples that miss a class
};

struct BootstrapResult {
  double p_value = 1.0;
  int runs_used = 0;
  int runs_skipped = 0;
  int a_not_better = 0;
  double mean_delta = 0.0;  // mean BAcc(A) - BAcc(B) over used runs
};

// Paired bootstrap: each run resamples item indices with replacement and
// compares both systems' BAcc on the same resample at their own thresholds.
// p = (#runs where A does not beat B + 1) / (#runs used + 1).
inline BootstrapResult paired_bootstrap(std::span<const double> scores_a,
                                        std::span<const double> scores_b,
                                        std::span<const int> labels, double threshold_a,
                                        double threshold_b, const BootstrapOptions& opt = {}) {
  require(scores_a.size() == labels.size() && scores_b.size() == labels.size(),
          ErrorKind::kContractViolation, "paired bootstrap needs aligned inputs");
  require(opt.runs >= 1 && opt.sample_size >= 1, ErrorKind::kContractViolation,
          "runs and sample_size must be >= 1");
  std::size_t positives = 0;
  for (int l : labels) positives += (l == 1);
  require(positives > 0 && positives < labels.size(), ErrorKind::kDegenerateClassBalance,
          "paired bootstrap needs both classes");

  const std::size_t n = labels.size();
  std::vector<bool> correct_a(n);
  std::vector<bool> correct_b(n);
  for (std::size_t i = 0; i < n; ++i) {
    correct_a[i] = (scores_a[i] >= threshold_a) == (labels[i] == 1);
    correct_b[i] = (scores_b[i] >= threshold_b) == (labels[i] == 1);
  }

  Rng rng(opt.seed);
  BootstrapResult out;
  double delta_sum = 0.0;
  std::vector<std::size_t> idx(opt.sample_size);
  for (int run = 0; run < opt.runs; ++run) {
    bool ok = false;
    for (int attempt = 0; attempt <= opt.max_redraws && !ok; ++attempt) {
      std::size_t pos = 0;
      for (auto& i : idx) {
        i = static_cast<std::size_t>(rng.uniform_index(n));
        pos += (labels[i] == 1);
      }
      ok = pos > 0 && pos < idx.size();
    }
    if (!ok) {
      ++out.runs_skipped;
      continue;
    }
    ConfusionCounts ca;
    ConfusionCounts cb;
    for (std::size_t i : idx) {
      const bool positive = labels[i] == 1;
      if (positive) {
        correct_a[i] ? ++ca.tp : ++ca.fn;
        correct_b[i] ? ++cb.tp : ++cb.fn;
      } else {
        correct_a[i] ? ++ca.tn : ++ca.fp;
        correct_b[i] ? ++cb.tn : ++cb.fp;
      }
    }
    const double a = balanced_accuracy(ca);
    const double b = balanced_accuracy(cb);
    ++out.runs_used;
    delta_sum += a - b;
    if (!(a > b)) ++out.a_not_better;
  }
  out.p_value = static_cast<double>(out.a_not_better + 1) / static_cast<double>(out.runs_used + 1);
  out.mean_delta = out.runs_used > 0 ? delta_sum / out.runs_used : 0.0;
  return out;
}

}  // namespace factcg::eval
