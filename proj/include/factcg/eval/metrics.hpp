#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "factcg/error.hpp"

namespace factcg::eval {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;

  std::size_t positives() const { return tp + fn; }
  std::size_t negatives() const { return tn + fp; }
  bool operator==(const ConfusionCounts&) const = default;
};

// Prediction rule: grounded iff score >= threshold.
inline ConfusionCounts confusion_at(std::span<const double> scores, std::span<const int> labels,
                                    double threshold) {
  require(scores.size() == labels.size(), ErrorKind::kContractViolation,
          "scores and labels differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      predicted ? ++c.tp : ++c.fn;
    } else {
      predicted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

inline double balanced_accuracy(const ConfusionCounts& c) {
  require(c.positives() > 0 && c.negatives() > 0, ErrorKind::kDegenerateClassBalance,
          "balanced accuracy needs both classes");
  return 0.5 * (static_cast<double>(c.tp) / static_cast<double>(c.positives()) +
                static_cast<double>(c.tn) / static_cast<double>(c.negatives()));
}

struct ThresholdResult {
  double threshold = 0.0;
  double bacc = 0.0;
  ConfusionCounts counts;
};

inline ThresholdResult evaluate_at(std::span<const double> scores, std::span<const int> labels,
                                   double threshold) {
  auto c = confusion_at(scores, labels, threshold);
  return ThresholdResult{threshold, balanced_accuracy(c), c};
}

// Number of grid intervals for a step that divides 1 (0.01 -> 100).
inline std::size_t grid_intervals(double step) {
  require(step > 0.0 && step <= 1.0, ErrorKind::kContractViolation, "grid step must be in (0,1]");
  auto n = static_cast<std::size_t>(std::llround(1.0 / step));
  require(std::fabs(static_cast<double>(n) * step - 1.0) < 1e-9, ErrorKind::kContractViolation,
          "grid step must divide 1");
  return n;
}

// Scans thresholds 0, step, ..., 1 and returns the lowest one with maximal
// BAcc. BAcc is ranked on the exact integer tp*N + tn*P (same denominator at
// every threshold), so ties are resolved without floating-point noise.
inline ThresholdResult tune_threshold(std::span<const double> scores, std::span<const int> labels,
                                      double grid_step = 0.01) {
  require(scores.size() == labels.size(), ErrorKind::kContractViolation,
          "scores and labels differ in length");
  std::vector<double> pos;
  std::vector<double> neg;
  for (std::size_t i = 0; i < scores.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(scores[i]);
  require(!pos.empty() && !neg.empty(), ErrorKind::kDegenerateClassBalance,
          "threshold tuning needs both classes");
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  const std::size_t n = grid_intervals(grid_step);
  const std::uint64_t P = pos.size();
  const std::uint64_t N = neg.size();
  std::uint64_t best_key = 0;
  ThresholdResult best;
  bool have = false;
  for (std::size_t i = 0; i <= n; ++i) {
    const double theta = static_cast<double>(i) / static_cast<double>(n);
    ConfusionCounts c;
    c.tp = static_cast<std::size_t>(pos.end() - std::lower_bound(pos.begin(), pos.end(), theta));
    c.fn = pos.size() - c.tp;
    c.fp = static_cast<std::size_t>(neg.end() - std::lower_bound(neg.begin(), neg.end(), theta));
    c.tn = neg.size() - c.fp;
    const std::uint64_t key = c.tp * N + c.tn * P;
    if (!have || key > best_key) {
      have = true;
      best_key = key;
      best = ThresholdResult{theta, balanced_accuracy(c), c};
    }
  }
  return best;
}

}  // namespace factcg::eval
