#include "hsnli/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hsnli/error.hpp"
#include "hsnli/random.hpp"

namespace hsnli {
namespace {

double f1(const ConfusionCounts& c) {
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 0.0 : static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

void check_bootstrap_args(std::size_t n, std::size_t resamples, double alpha) {
  if (n == 0) throw Error(ErrorKind::precondition, "bootstrap needs at least one score");
  if (resamples == 0) throw Error(ErrorKind::precondition, "bootstrap needs B >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::precondition, "alpha must lie in (0,1)");
  }
}

Interval interval_from(std::vector<double>& stats, double alpha) {
  std::sort(stats.begin(), stats.end());
  return {percentile(stats, alpha / 2.0), percentile(stats, 1.0 - alpha / 2.0)};
}

}  // namespace

MacroF1 macro_f1(std::span<const HateLabel> predictions, std::span<const HateLabel> gold) {
  if (predictions.size() != gold.size()) {
    throw Error(ErrorKind::precondition, "predictions and gold differ in length");
  }
  if (gold.empty()) throw Error(ErrorKind::precondition, "macro-F1 of an empty set");

  ConfusionCounts hate;
  ConfusionCounts not_hate;
  bool seen_hate = false;
  bool seen_not_hate = false;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const HateLabel p = predictions[i];
    const HateLabel g = gold[i];
    seen_hate |= p == HateLabel::hate || g == HateLabel::hate;
    seen_not_hate |= p == HateLabel::not_hate || g == HateLabel::not_hate;
    if (p == g) {
      ++(g == HateLabel::hate ? hate : not_hate).tp;
    } else {
      ++(p == HateLabel::hate ? hate : not_hate).fp;
      ++(g == HateLabel::hate ? hate : not_hate).fn;
    }
  }
  MacroF1 out;
  out.f1_hate = f1(hate);
  out.f1_not_hate = f1(not_hate);
  out.value = (out.f1_hate + out.f1_not_hate) / 2.0;
  if (!seen_hate) out.absent_classes.push_back(HateLabel::hate);
  if (!seen_not_hate) out.absent_classes.push_back(HateLabel::not_hate);
  return out;
}

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorKind::precondition, "percentile of an empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return std::clamp(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]), sorted[lo],
                    sorted[lo + 1]);
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

Interval bootstrap_ci(std::span<const double> run_scores, std::size_t resamples, double alpha,
                      std::uint64_t seed) {
  check_bootstrap_args(run_scores.size(), resamples, alpha);
  const auto [min_it, max_it] = std::minmax_element(run_scores.begin(), run_scores.end());
  const double lo = *min_it;
  const double hi = *max_it;
  const std::size_t n = run_scores.size();

  Engine engine(seed);
  std::vector<double> means(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += run_scores[uniform_index(engine, n)];
    means[b] = std::clamp(sum / static_cast<double>(n), lo, hi);
  }
  return interval_from(means, alpha);
}

Interval bootstrap_ci_items(std::span<const std::vector<HateLabel>> run_predictions,
                            std::span<const HateLabel> gold, std::size_t resamples,
                            double alpha, std::uint64_t seed) {
  check_bootstrap_args(gold.size(), resamples, alpha);
  if (run_predictions.empty()) throw Error(ErrorKind::precondition, "no runs to bootstrap");
  for (const auto& run : run_predictions) {
    if (run.size() != gold.size()) {
      throw Error(ErrorKind::precondition, "run predictions differ in length from gold");
    }
  }
  const std::size_t n = gold.size();
  Engine engine(seed);
  std::vector<std::size_t> picks(n);
  std::vector<HateLabel> g(n);
  std::vector<HateLabel> p(n);
  std::vector<double> stats(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& idx : picks) idx = uniform_index(engine, n);
    for (std::size_t i = 0; i < n; ++i) g[i] = gold[picks[i]];
    double sum = 0.0;
    for (const auto& run : run_predictions) {
      for (std::size_t i = 0; i < n; ++i) p[i] = run[picks[i]];
      sum += macro_f1(p, g).value;
    }
    stats[b] = sum / static_cast<double>(run_predictions.size());
  }
  return interval_from(stats, alpha);
}

}  // namespace hsnli
