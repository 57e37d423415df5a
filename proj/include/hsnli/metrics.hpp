#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hsnli/labels.hpp"

namespace hsnli {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct MacroF1 {
  double value = 0.0;
  double f1_hate = 0.0;
  double f1_not_hate = 0.0;
  // Classes missing from both gold and predictions; they score F1 = 0.
  std::vector<HateLabel> absent_classes;
};

// Unweighted mean of the hate and not_hate F1 scores.
MacroF1 macro_f1(std::span<const HateLabel> predictions, std::span<const HateLabel> gold);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// Linear interpolation between order statistics (h = (n - 1) q); `sorted`
// must be ascending and non-empty.
double percentile(std::span<const double> sorted, double q);

// Percentile bootstrap of the mean of per-run scores. Each of the B resamples
// draws |scores| indices with uniform_index on an mt19937_64 seeded with
// `seed` and sums the picked scores in draw order; the mean is clamped into
// [min, max] of the scores. The interval is the [alpha/2, 1 - alpha/2]
// percentiles of the B means.
Interval bootstrap_ci(std::span<const double> run_scores, std::size_t resamples, double alpha,
                      std::uint64_t seed);

// Item-level variant: resamples test items (shared across runs) and takes the
// mean macro-F1 over runs for each resample.
Interval bootstrap_ci_items(std::span<const std::vector<HateLabel>> run_predictions,
                            std::span<const HateLabel> gold, std::size_t resamples,
                            double alpha, std::uint64_t seed);

double mean(std::span<const double> values);

}  // namespace hsnli
