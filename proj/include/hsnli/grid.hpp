#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hsnli/catalog.hpp"
#include "hsnli/corpus.hpp"
#include "hsnli/nli.hpp"
#include "hsnli/strategies.hpp"

namespace hsnli {

enum class EvalMode { standard, strategies };
enum class TestSet { held_out, hatecheck };
enum class NliStage { none, target_language, xnli };
enum class BootstrapUnit { runs, items };

std::string_view to_string(EvalMode mode);
std::string_view to_string(TestSet set);
std::optional<TestSet> parse_test_set(std::string_view text);

// A training recipe: monolingual M or multilingual X base, an optional NLI
// phase (NLI = target-language XNLI subset, XNLI = full shuffled XNLI), an
// optional English hate-speech phase (DEN, FEN or KEN), and how it is
// evaluated.
struct ModelVariant {
  ModelKind base = ModelKind::multilingual;
  NliStage nli = NliStage::none;
  std::string english_hs;
  EvalMode mode = EvalMode::standard;

  // Accepts tags such as "M", "X + NLI", "X+XNLI+FEN"; whitespace is ignored.
  static ModelVariant parse(std::string_view tag, EvalMode mode = EvalMode::standard);

  std::string tag() const;
  // tag() plus " [strategies]" in strategies mode.
  std::string label() const;
  // The model that only went through the NLI phase; serves auxiliary
  // hypotheses in strategies mode.
  std::string nli_base_tag() const;
  bool nli_trained() const { return nli != NliStage::none; }

  friend bool operator==(const ModelVariant&, const ModelVariant&) = default;
};

struct LanguageData {
  std::string code;
  // Corpus JSONL with train and test splits; train feeds N-shot sampling and
  // test is the held-out evaluation set.
  std::filesystem::path corpus;
  std::filesystem::path hatecheck;
  std::string held_out_name;
  std::string hatecheck_name;
};

struct VariantSpec {
  ModelVariant variant;
  // Backend location patterns with {tag}, {language}, {n} and {seed}
  // placeholders; empty means the grid-wide default.
  std::string backend;
  std::string aux_backend;
};

struct GridConfig {
  std::vector<VariantSpec> variants;
  std::vector<LanguageData> languages;
  std::vector<std::size_t> n_shots = {0, 20, 200, 2000};
  std::vector<TestSet> test_sets = {TestSet::held_out, TestSet::hatecheck};
  std::size_t runs = 10;
  double alpha = 0.05;
  std::size_t resamples = 10000;
  std::uint64_t seed = 0;
  BootstrapUnit bootstrap = BootstrapUnit::runs;
  bool stratified_sampling = false;
  bool write_samples = false;
  DecisionPolicy policy;
  std::string backend = "models/{tag}/{language}/n{n}/seed{seed}";
  std::string aux_backend;
  std::filesystem::path catalog;
  std::filesystem::path strategies;
  std::filesystem::path model_dir;

  void validate() const;
  // Relative paths in the file resolve against `base_dir`.
  static GridConfig parse(std::string_view toml_text, const std::filesystem::path& base_dir = {});
  static GridConfig load(const std::filesystem::path& path);

  // Hash of every setting that influences cell results; journal entries
  // written under another fingerprint are not reused.
  std::string fingerprint() const;
};

struct ExperimentCell {
  std::size_t variant_index = 0;
  ModelVariant variant;
  std::string language;
  std::size_t n_shot = 0;
  TestSet test_set = TestSet::held_out;

  std::string key() const;
};

// Cells in canonical order: variant, language, N, test set.
std::vector<ExperimentCell> enumerate_cells(const GridConfig& config);

struct BackendRequest {
  std::string tag;
  std::string language;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool auxiliary = false;
  std::string pattern;
};

std::string expand_backend_pattern(std::string_view pattern, const BackendRequest& request);

class BackendRegistry {
 public:
  virtual ~BackendRegistry() = default;
  virtual std::shared_ptr<const InferenceBackend> resolve(const BackendRequest& request) = 0;
};

// Resolves expanded patterns to files: "*.jsonl" is a mock table, a directory
// is an exported model. Loaded backends are cached by path; safe for
// concurrent use.
class FileBackendRegistry final : public BackendRegistry {
 public:
  FileBackendRegistry(std::filesystem::path base_dir, const HypothesisCatalog* catalog);

  std::shared_ptr<const InferenceBackend> resolve(const BackendRequest& request) override;

  std::size_t loads() const { return loads_.load(); }

 private:
  std::filesystem::path base_dir_;
  const HypothesisCatalog* catalog_;
  std::mutex mutex_;
  std::map<std::filesystem::path, std::shared_ptr<const InferenceBackend>> cache_;
  std::atomic<std::size_t> loads_{0};
};

struct LanguageSplits {
  std::vector<LabeledPost> train;
  std::vector<LabeledPost> held_out;
  std::vector<LabeledPost> hatecheck;
  std::string corpus_error;
  std::string hatecheck_error;
};

using GridData = std::map<std::string, LanguageSplits, std::less<>>;

// Load failures are recorded per language; the affected cells fail later
// instead of aborting the grid.
GridData load_grid_data(const GridConfig& config);

struct RunRecord {
  std::uint64_t seed = 0;
  double macro_f1 = 0.0;
  double f1_hate = 0.0;
  double f1_not_hate = 0.0;
  std::size_t train_hate = 0;
  std::size_t train_not_hate = 0;
  std::uint64_t train_digest = 0;
  bool absent_class = false;
};

struct MetricReport {
  double macro_f1 = 0.0;
  double f1_hate = 0.0;
  double f1_not_hate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t runs = 0;
};

struct CellResult {
  ExperimentCell cell;
  std::string dataset;
  bool ok = false;
  std::string error;
  MetricReport report;
  std::vector<RunRecord> runs;
};

struct GridRunOptions {
  std::size_t jobs = 1;
  // Journal directory; finished cells are appended to cells.jsonl there and
  // reused on the next run.
  std::optional<std::filesystem::path> out_dir;
  // Stop after computing this many new cells (0 = no limit). Simulates an
  // interrupted run.
  std::size_t max_new_cells = 0;
};

struct GridOutcome {
  // One entry per enumerated cell; cells left unfinished by max_new_cells are
  // missing.
  std::vector<CellResult> results;
  std::size_t computed = 0;
  std::size_t resumed = 0;
  std::size_t failed = 0;
  bool complete = false;
};

GridOutcome run_grid(const GridConfig& config, BackendRegistry& registry, const GridData& data,
                     const HypothesisCatalog& catalog, const StrategyConfig& strategy_config,
                     const GridRunOptions& options = {});

// Computes one cell; never throws, failures end up in CellResult::error.
// With `sample_dir` set and config.write_samples on, every N-shot training
// sample is written there as <language>/n<N>/seed<s>.jsonl for the trainer.
CellResult run_cell(const ExperimentCell& cell, const GridConfig& config,
                    BackendRegistry& registry, const GridData& data,
                    const HypothesisCatalog& catalog, const StrategyConfig& strategy_config,
                    const std::filesystem::path* sample_dir = nullptr);

std::string cell_result_to_json(const CellResult& result, std::string_view fingerprint);
std::optional<CellResult> cell_result_from_json(std::string_view line,
                                                std::string* fingerprint = nullptr);

// Writes results.jsonl (one record per cell) and report.csv (reference table layout)
// into `out_dir` atomically.
void write_grid_outputs(const std::filesystem::path& out_dir, const GridOutcome& outcome,
                        const GridConfig& config);

}  // namespace hsnli
