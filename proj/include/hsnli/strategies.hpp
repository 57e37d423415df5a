#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hsnli/catalog.hpp"
#include "hsnli/nli.hpp"

namespace hsnli {

// Hypothesis-engineering filters. Each one can only turn a hate prediction of
// the main hypothesis into not_hate.
enum class Strategy { filter_by_target, filter_reclaimed_slurs, filter_counterspeech };

std::string_view to_string(Strategy strategy);
std::optional<Strategy> parse_strategy(std::string_view text);

inline constexpr Strategy kAllStrategies[] = {Strategy::filter_by_target,
                                              Strategy::filter_reclaimed_slurs,
                                              Strategy::filter_counterspeech};

namespace slot_names {
inline constexpr std::string_view self_reference = "self_reference";
inline constexpr std::string_view positive_sentiment = "positive_sentiment";
inline constexpr std::string_view references_statement = "references_statement";
inline constexpr std::string_view referenced_is_hate = "referenced_is_hate";
inline constexpr std::string_view opposes_referenced = "opposes_referenced";
}  // namespace slot_names

// Protected characteristics probed by filter_by_target ("This text is about
// <characteristic>.").
std::vector<std::string> default_characteristics();

struct StrategyConfig {
  std::set<Strategy> enabled = {kAllStrategies[0], kAllStrategies[1], kAllStrategies[2]};
  double tau_target = 0.5;
  double tau_slur = 0.5;
  double tau_counter = 0.5;
  std::vector<std::string> characteristics = default_characteristics();
  // language -> slur terms. A language without terms never triggers the
  // reclaimed-slur filter.
  std::map<std::string, std::vector<std::string>, std::less<>> slur_lexicon;

  bool is_enabled(Strategy s) const { return enabled.contains(s); }

  // Thresholds must lie in [0,1]. The closed ends are allowed so a filter
  // can be made unreachable (tau_target = 0, tau_slur = tau_counter = 1).
  void validate() const;

  // Relative lexicon paths resolve against `base_dir`.
  static StrategyConfig parse(std::string_view toml_text,
                              const std::filesystem::path& base_dir = {});
  static StrategyConfig load(const std::filesystem::path& path);

  // A configuration under which no filter can fire.
  static StrategyConfig unreachable();
};

std::vector<HypothesisSlot> strategy_slots(Strategy strategy, const StrategyConfig& config);

// Main hypothesis plus English texts for every default auxiliary slot.
HypothesisCatalog default_hypothesis_catalog();

// Every slot needed by an enabled strategy must exist in the default language.
void check_catalog(const HypothesisCatalog& catalog, const StrategyConfig& config);

struct SlotScore {
  HypothesisSlot slot;
  NliScores scores;
};

struct FilterOutcome {
  Strategy strategy = Strategy::filter_by_target;
  bool fired = false;
  std::vector<SlotScore> slot_scores;
  // Only set by filter_reclaimed_slurs.
  std::optional<bool> lexicon_match;
};

// What the filters score against: the NLI-only auxiliary model and how its
// hypotheses are resolved.
struct AuxContext {
  const InferenceBackend& backend;
  const HypothesisCatalog& catalog;
  std::string_view language;
  ModelKind model_kind;
};

// Fires iff max_c p_e("about <c>") < tau_target.
FilterOutcome filter_by_target(std::string_view premise, const AuxContext& aux,
                               const StrategyConfig& config);

// Gated on a lexicon term in the premise; then fires iff the self-reference or
// the positive-sentiment slot has p_e > tau_slur.
FilterOutcome filter_reclaimed_slurs(std::string_view premise, const AuxContext& aux,
                                     const StrategyConfig& config);

// Fires iff all three counterspeech slots have p_e > tau_counter.
FilterOutcome filter_counterspeech(std::string_view premise, const AuxContext& aux,
                                   const StrategyConfig& config);

FilterOutcome run_filter(Strategy strategy, std::string_view premise, const AuxContext& aux,
                         const StrategyConfig& config);

struct ClassificationTrace {
  std::string input_id;
  std::string language;
  NliScores main_scores;
  HateLabel main_label = HateLabel::not_hate;
  std::vector<SlotScore> aux_scores;
  // True when the main prediction was not_hate and no filter ran.
  bool aux_skipped = true;
  std::optional<bool> slur_lexicon_match;
  std::vector<Strategy> fired_filters;
  HateLabel final_label = HateLabel::not_hate;
};

struct StrategyInput {
  std::string_view id;
  std::string_view text;
  std::string_view language;
};

// Main prediction on `main_backend`; when it says hate every enabled filter
// runs against `aux_backend` and any firing filter flips the result to
// not_hate. The text is normalized once and shared by all calls.
ClassificationTrace classify_with_strategies(const StrategyInput& input,
                                             const InferenceBackend& main_backend,
                                             const InferenceBackend& aux_backend,
                                             const HypothesisCatalog& catalog,
                                             const DecisionPolicy& policy,
                                             const StrategyConfig& config,
                                             ModelKind model_kind);

// Standard evaluation expressed as a trace with no filters.
ClassificationTrace classify_standard(const StrategyInput& input,
                                      const InferenceBackend& backend,
                                      const HypothesisCatalog& catalog,
                                      const DecisionPolicy& policy, ModelKind model_kind);

// One JSON object per trace. `config`, when given, is echoed into the record.
std::string trace_to_json(const ClassificationTrace& trace,
                          const StrategyConfig* config = nullptr);
std::vector<ClassificationTrace> parse_traces_jsonl(std::string_view content);

}  // namespace hsnli
