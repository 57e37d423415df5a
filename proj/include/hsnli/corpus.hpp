#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsnli/labels.hpp"

namespace hsnli {

struct LabeledPost {
  std::string id;
  std::string text;
  HateLabel label = HateLabel::not_hate;
  std::string language;
  Split split = Split::train;

  friend bool operator==(const LabeledPost&, const LabeledPost&) = default;
};

struct NliExample {
  std::string premise;
  std::string hypothesis;
  NliLabel label = NliLabel::neutral;
  std::string premise_language;
  std::string hypothesis_language;

  friend bool operator==(const NliExample&, const NliExample&) = default;
};

// One underlying NLI example with its premise and hypothesis in every
// available language.
struct ParallelNliExample {
  std::string id;
  NliLabel label = NliLabel::neutral;
  std::map<std::string, std::string> premise;
  std::map<std::string, std::string> hypothesis;
};

enum class Strictness { strict, lenient };

struct DatasetManifest {
  std::string code;
  std::string source;
  std::map<Split, std::size_t> expected_sizes;
  std::optional<double> expected_hate_pct;
  // Split the hate fraction is measured on; all records when unset.
  std::optional<Split> hate_pct_split;
  std::size_t size_tolerance = 0;
  double hate_pct_tolerance = 0.001;

  void validate() const;
};

struct DatasetStats {
  std::map<Split, std::size_t> sizes;
  std::map<Split, std::size_t> hate;

  std::size_t total() const;
  std::size_t hate_total() const;
  // Fraction of hate posts on one split, or over all records when unset.
  double hate_fraction(std::optional<Split> split = std::nullopt) const;
};

DatasetStats compute_stats(std::span<const LabeledPost> posts);

struct LoadedDataset {
  std::vector<LabeledPost> posts;
  DatasetStats stats;
  std::vector<std::string> warnings;
};

// Manifest checks become warnings in lenient mode and a validation error in
// strict mode.
LoadedDataset load_dataset(const std::filesystem::path& path,
                           const DatasetManifest* manifest = nullptr,
                           Strictness strictness = Strictness::strict);

std::vector<std::string> check_manifest(const DatasetStats& stats,
                                        const DatasetManifest& manifest);

DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(std::string_view toml_text);

// Keeps every hate post and floor(h * (1 - r) / r) non-hate posts chosen
// uniformly with `seed`, so the result has hate ratio >= r. Input order is
// preserved. A corpus already above the target is an error in strict mode and
// returned unchanged in lenient mode.
std::vector<LabeledPost> downsample_non_hate(std::span<const LabeledPost> posts,
                                             double target_ratio, std::uint64_t seed,
                                             Strictness strictness = Strictness::strict);

// Number of non-hate posts to keep for `hate` hate posts at `target_ratio`.
std::size_t downsample_keep_count(std::size_t hate, double target_ratio);

struct SamplingSpec {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool stratified = false;
};

struct NShotSample {
  std::vector<LabeledPost> posts;
  std::size_t hate = 0;
  std::size_t not_hate = 0;
  std::uint64_t seed = 0;
};

// Uniform sample without replacement; the result keeps the input order. With
// `stratified`, per-class quotas follow the input class proportions.
NShotSample sample_n_shot(std::span<const LabeledPost> posts, const SamplingSpec& spec);

// hate -> entailment, not_hate -> contradiction, one example per post.
std::vector<NliExample> hs_to_nli(std::span<const LabeledPost> posts,
                                  std::string_view hypothesis);

std::optional<HateLabel> nli_to_hate_label(NliLabel label);

// For each example, premise and hypothesis languages are drawn independently
// and uniformly from `languages`.
std::vector<NliExample> shuffle_xnli_languages(std::span<const ParallelNliExample> corpus,
                                               std::span<const std::string> languages,
                                               std::uint64_t seed);

// --- JSONL interchange ---------------------------------------------------

std::vector<LabeledPost> read_corpus_jsonl(const std::filesystem::path& path);
std::vector<LabeledPost> parse_corpus_jsonl(std::string_view content);
std::string to_corpus_jsonl(std::span<const LabeledPost> posts);

std::vector<NliExample> read_nli_jsonl(const std::filesystem::path& path);
std::vector<NliExample> parse_nli_jsonl(std::string_view content);
std::string to_nli_jsonl(std::span<const NliExample> examples);

std::vector<ParallelNliExample> read_parallel_nli_jsonl(const std::filesystem::path& path);
std::vector<ParallelNliExample> parse_parallel_nli_jsonl(std::string_view content);

}  // namespace hsnli
