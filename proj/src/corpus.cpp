#include "hsnli/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hsnli/error.hpp"
#include "hsnli/random.hpp"

namespace hsnli {
namespace {

// Partial Fisher-Yates: the first k entries of `pool` become a uniform
// k-subset.
void select_prefix(std::vector<std::size_t>& pool, std::size_t k, Engine& engine) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_index(engine, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
}

double ratio(std::size_t hate, std::size_t non_hate) {
  if (hate + non_hate == 0) return 0.0;
  return static_cast<double>(hate) / static_cast<double>(hate + non_hate);
}

}  // namespace

void DatasetManifest::validate() const {
  if (expected_hate_pct && (*expected_hate_pct < 0.0 || *expected_hate_pct > 1.0)) {
    throw Error(ErrorKind::validation,
                "manifest " + code + ": expected_hate_pct must lie in [0,1]");
  }
  if (hate_pct_tolerance < 0.0) {
    throw Error(ErrorKind::validation, "manifest " + code + ": negative tolerance");
  }
}

std::size_t DatasetStats::total() const {
  std::size_t n = 0;
  for (const auto& [split, count] : sizes) n += count;
  return n;
}

std::size_t DatasetStats::hate_total() const {
  std::size_t n = 0;
  for (const auto& [split, count] : hate) n += count;
  return n;
}

double DatasetStats::hate_fraction(std::optional<Split> split) const {
  if (!split) {
    const std::size_t n = total();
    return n == 0 ? 0.0 : static_cast<double>(hate_total()) / static_cast<double>(n);
  }
  const auto s = sizes.find(*split);
  if (s == sizes.end() || s->second == 0) return 0.0;
  const auto h = hate.find(*split);
  const std::size_t hate_count = h == hate.end() ? 0 : h->second;
  return static_cast<double>(hate_count) / static_cast<double>(s->second);
}

DatasetStats compute_stats(std::span<const LabeledPost> posts) {
  DatasetStats stats;
  for (const auto& post : posts) {
    ++stats.sizes[post.split];
    if (post.label == HateLabel::hate) ++stats.hate[post.split];
  }
  return stats;
}

std::vector<std::string> check_manifest(const DatasetStats& stats,
                                        const DatasetManifest& manifest) {
  std::vector<std::string> problems;
  for (const auto& [split, expected] : manifest.expected_sizes) {
    const auto it = stats.sizes.find(split);
    const std::size_t actual = it == stats.sizes.end() ? 0 : it->second;
    const std::size_t diff = actual > expected ? actual - expected : expected - actual;
    if (diff > manifest.size_tolerance) {
      std::ostringstream msg;
      msg << manifest.code << ": " << to_string(split) << " size " << actual
          << " != expected " << expected;
      problems.push_back(msg.str());
    }
  }
  if (manifest.expected_hate_pct) {
    const double actual = stats.hate_fraction(manifest.hate_pct_split);
    if (std::abs(actual - *manifest.expected_hate_pct) > manifest.hate_pct_tolerance) {
      std::ostringstream msg;
      msg << manifest.code << ": hate fraction " << actual << " != expected "
          << *manifest.expected_hate_pct << " (tolerance " << manifest.hate_pct_tolerance
          << ")";
      problems.push_back(msg.str());
    }
  }
  return problems;
}

LoadedDataset load_dataset(const std::filesystem::path& path, const DatasetManifest* manifest,
                           Strictness strictness) {
  LoadedDataset out;
  out.posts = read_corpus_jsonl(path);
  out.stats = compute_stats(out.posts);
  if (manifest != nullptr) {
    manifest->validate();
    out.warnings = check_manifest(out.stats, *manifest);
    if (!out.warnings.empty() && strictness == Strictness::strict) {
      throw Error(ErrorKind::validation, path.string() + ": " + out.warnings.front());
    }
  }
  return out;
}

std::size_t downsample_keep_count(std::size_t hate, double target_ratio) {
  if (!(target_ratio > 0.0 && target_ratio < 1.0)) {
    throw Error(ErrorKind::precondition, "target ratio must lie in (0,1)");
  }
  if (hate == 0) return 0;
  const double h = static_cast<double>(hate);
  auto k = static_cast<std::size_t>(std::floor(h * (1.0 - target_ratio) / target_ratio));
  // The closed form can be off by one after rounding; settle on the largest k
  // that still satisfies h / (h + k) >= r.
  while (ratio(hate, k + 1) >= target_ratio) ++k;
  while (k > 0 && ratio(hate, k) < target_ratio) --k;
  return k;
}

std::vector<LabeledPost> downsample_non_hate(std::span<const LabeledPost> posts,
                                             double target_ratio, std::uint64_t seed,
                                             Strictness strictness) {
  std::vector<std::size_t> non_hate;
  std::size_t hate = 0;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (posts[i].label == HateLabel::hate) {
      ++hate;
    } else {
      non_hate.push_back(i);
    }
  }
  const std::size_t keep_target = downsample_keep_count(hate, target_ratio);
  if (ratio(hate, non_hate.size()) > target_ratio) {
    if (strictness == Strictness::strict) {
      std::ostringstream msg;
      msg << "hate ratio " << ratio(hate, non_hate.size()) << " already above target "
          << target_ratio;
      throw Error(ErrorKind::precondition, msg.str());
    }
    return {posts.begin(), posts.end()};
  }
  const std::size_t keep = std::min(keep_target, non_hate.size());
  Engine engine(seed);
  select_prefix(non_hate, keep, engine);
  std::vector<bool> kept(posts.size(), false);
  for (std::size_t i = 0; i < keep; ++i) kept[non_hate[i]] = true;

  std::vector<LabeledPost> out;
  out.reserve(hate + keep);
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (posts[i].label == HateLabel::hate || kept[i]) out.push_back(posts[i]);
  }
  return out;
}

NShotSample sample_n_shot(std::span<const LabeledPost> posts, const SamplingSpec& spec) {
  if (spec.n > posts.size()) {
    std::ostringstream msg;
    msg << "cannot sample " << spec.n << " posts from " << posts.size();
    throw Error(ErrorKind::precondition, msg.str());
  }
  Engine engine(spec.seed);
  std::vector<bool> chosen(posts.size(), false);

  if (!spec.stratified) {
    std::vector<std::size_t> pool(posts.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    select_prefix(pool, spec.n, engine);
    for (std::size_t i = 0; i < spec.n; ++i) chosen[pool[i]] = true;
  } else {
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < posts.size(); ++i) {
      by_class[posts[i].label == HateLabel::hate ? 0 : 1].push_back(i);
    }
    // Largest-remainder quotas, hate first on ties.
    std::size_t quota[2];
    double remainder[2];
    std::size_t assigned = 0;
    for (int c = 0; c < 2; ++c) {
      const double exact = posts.empty() ? 0.0
                                         : static_cast<double>(spec.n) *
                                               static_cast<double>(by_class[c].size()) /
                                               static_cast<double>(posts.size());
      quota[c] = static_cast<std::size_t>(std::floor(exact));
      remainder[c] = exact - static_cast<double>(quota[c]);
      assigned += quota[c];
    }
    while (assigned < spec.n) {
      int c = remainder[0] >= remainder[1] ? 0 : 1;
      if (quota[c] >= by_class[c].size()) c = 1 - c;
      ++quota[c];
      remainder[c] = -1.0;
      ++assigned;
    }
    for (int c = 0; c < 2; ++c) {
      select_prefix(by_class[c], quota[c], engine);
      for (std::size_t i = 0; i < quota[c]; ++i) chosen[by_class[c][i]] = true;
    }
  }

  NShotSample sample;
  sample.seed = spec.seed;
  sample.posts.reserve(spec.n);
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (!chosen[i]) continue;
    sample.posts.push_back(posts[i]);
    if (posts[i].label == HateLabel::hate) {
      ++sample.hate;
    } else {
      ++sample.not_hate;
    }
  }
  return sample;
}

std::vector<NliExample> hs_to_nli(std::span<const LabeledPost> posts,
                                  std::string_view hypothesis) {
  if (hypothesis.empty()) {
    throw Error(ErrorKind::precondition, "hypothesis must be non-empty");
  }
  std::vector<NliExample> out;
  out.reserve(posts.size());
  for (const auto& post : posts) {
    NliExample ex;
    ex.premise = post.text;
    ex.hypothesis = std::string(hypothesis);
    ex.label = post.label == HateLabel::hate ? NliLabel::entailment : NliLabel::contradiction;
    ex.premise_language = post.language;
    ex.hypothesis_language = post.language;
    out.push_back(std::move(ex));
  }
  return out;
}

std::optional<HateLabel> nli_to_hate_label(NliLabel label) {
  switch (label) {
    case NliLabel::entailment:
      return HateLabel::hate;
    case NliLabel::contradiction:
      return HateLabel::not_hate;
    case NliLabel::neutral:
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<NliExample> shuffle_xnli_languages(std::span<const ParallelNliExample> corpus,
                                               std::span<const std::string> languages,
                                               std::uint64_t seed) {
  if (languages.empty()) {
    throw Error(ErrorKind::precondition, "at least one language is required");
  }
  Engine engine(seed);
  std::vector<NliExample> out;
  out.reserve(corpus.size());
  for (const auto& ex : corpus) {
    const std::string& p_lang = languages[uniform_index(engine, languages.size())];
    const std::string& h_lang = languages[uniform_index(engine, languages.size())];
    const auto p = ex.premise.find(p_lang);
    const auto h = ex.hypothesis.find(h_lang);
    if (p == ex.premise.end()) {
      throw Error(ErrorKind::validation,
                  "example " + ex.id + ": missing premise translation for " + p_lang);
    }
    if (h == ex.hypothesis.end()) {
      throw Error(ErrorKind::validation,
                  "example " + ex.id + ": missing hypothesis translation for " + h_lang);
    }
    out.push_back(NliExample{p->second, h->second, ex.label, p_lang, h_lang});
  }
  return out;
}

}  // namespace hsnli
