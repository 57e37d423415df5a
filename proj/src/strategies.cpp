#include "hsnli/strategies.hpp"

#include <algorithm>
#include <sstream>

#include "hsnli/engine.hpp"
#include "hsnli/error.hpp"
#include "hsnli/io.hpp"
#include "hsnli/text.hpp"
#include "toml_util.hpp"

namespace hsnli {
namespace {

HypothesisSlot slot_of(Strategy strategy, std::string_view name) {
  return {std::string(to_string(strategy)), std::string(name)};
}

NliScores score_slot(const HypothesisSlot& slot, std::string_view premise, const AuxContext& aux,
                     FilterOutcome& outcome) {
  const std::string& hypothesis =
      resolve_hypothesis(aux.catalog, slot, aux.language, aux.model_kind);
  const NliScores scores = score_pair(aux.backend, premise, hypothesis);
  outcome.slot_scores.push_back({slot, scores});
  return scores;
}

void check_threshold(double tau, const char* name) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorKind::config, std::string(name) + " must lie in [0,1]");
  }
}

std::vector<std::string> read_lexicon_file(const std::filesystem::path& path) {
  std::vector<std::string> terms;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t");
    terms.push_back(line.substr(first, last - first + 1));
  }
  return terms;
}

}  // namespace

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::filter_by_target:
      return "filter_by_target";
    case Strategy::filter_reclaimed_slurs:
      return "filter_reclaimed_slurs";
    case Strategy::filter_counterspeech:
      return "filter_counterspeech";
  }
  return "filter_by_target";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  for (Strategy s : kAllStrategies) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::vector<std::string> default_characteristics() {
  return {"religion",           "race or ethnicity", "gender",
          "sexual orientation", "disability",        "national origin"};
}

void StrategyConfig::validate() const {
  check_threshold(tau_target, "tau_target");
  check_threshold(tau_slur, "tau_slur");
  check_threshold(tau_counter, "tau_counter");
  if (is_enabled(Strategy::filter_by_target) && characteristics.empty()) {
    throw Error(ErrorKind::config, "filter_by_target needs at least one characteristic");
  }
}

StrategyConfig StrategyConfig::unreachable() {
  StrategyConfig config;
  config.tau_target = 0.0;
  config.tau_slur = 1.0;
  config.tau_counter = 1.0;
  return config;
}

StrategyConfig StrategyConfig::parse(std::string_view toml_text,
                                     const std::filesystem::path& base_dir) {
  const toml::table doc = detail::parse_toml(toml_text, "strategy config");
  StrategyConfig config;
  if (doc.contains("enabled")) {
    config.enabled.clear();
    for (const auto& name : detail::string_array(doc["enabled"], "enabled")) {
      const auto s = parse_strategy(name);
      if (!s) throw Error(ErrorKind::config, "unknown strategy \"" + name + "\"");
      config.enabled.insert(*s);
    }
  }
  if (const toml::table* t = doc["thresholds"].as_table()) {
    config.tau_target = (*t)["target"].value_or(config.tau_target);
    config.tau_slur = (*t)["slur"].value_or(config.tau_slur);
    config.tau_counter = (*t)["counter"].value_or(config.tau_counter);
  }
  if (doc["target"]["characteristics"]) {
    config.characteristics =
        detail::string_array(doc["target"]["characteristics"], "target.characteristics");
  }
  if (const toml::table* lex = doc["lexicon"].as_table()) {
    for (const auto& [lang, node] : *lex) {
      const auto rel = node.value<std::string>();
      if (!rel) throw Error(ErrorKind::config, "lexicon entries must be file paths");
      std::filesystem::path p(*rel);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      auto& terms = config.slur_lexicon[std::string(lang.str())];
      for (auto& term : read_lexicon_file(p)) terms.push_back(std::move(term));
    }
  }
  if (const toml::table* inline_terms = doc["lexicon_terms"].as_table()) {
    for (const auto& [lang, node] : *inline_terms) {
      const std::string key(lang.str());
      auto& terms = config.slur_lexicon[key];
      for (auto& term : detail::string_array(doc["lexicon_terms"][key], "lexicon_terms")) {
        terms.push_back(std::move(term));
      }
    }
  }
  config.validate();
  return config;
}

StrategyConfig StrategyConfig::load(const std::filesystem::path& path) {
  try {
    return parse(read_file(path), path.parent_path());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) {
      throw Error(ErrorKind::config, path.string() + ": " + e.what());
    }
    throw;
  }
}

std::vector<HypothesisSlot> strategy_slots(Strategy strategy, const StrategyConfig& config) {
  std::vector<HypothesisSlot> out;
  switch (strategy) {
    case Strategy::filter_by_target:
      for (const auto& c : config.characteristics) out.push_back(slot_of(strategy, c));
      break;
    case Strategy::filter_reclaimed_slurs:
      out.push_back(slot_of(strategy, slot_names::self_reference));
      out.push_back(slot_of(strategy, slot_names::positive_sentiment));
      break;
    case Strategy::filter_counterspeech:
      out.push_back(slot_of(strategy, slot_names::references_statement));
      out.push_back(slot_of(strategy, slot_names::referenced_is_hate));
      out.push_back(slot_of(strategy, slot_names::opposes_referenced));
      break;
  }
  return out;
}

HypothesisCatalog default_hypothesis_catalog() {
  HypothesisCatalog catalog("en");
  catalog.set(HypothesisSlot::main(), "en", std::string(kMainHypothesis));
  for (const auto& c : default_characteristics()) {
    catalog.set(slot_of(Strategy::filter_by_target, c), "en", "This text is about " + c + ".");
  }
  const Strategy slurs = Strategy::filter_reclaimed_slurs;
  catalog.set(slot_of(slurs, slot_names::self_reference), "en",
              "The author of this text talks about themselves.");
  catalog.set(slot_of(slurs, slot_names::positive_sentiment), "en",
              "This text has a positive sentiment.");
  const Strategy counter = Strategy::filter_counterspeech;
  catalog.set(slot_of(counter, slot_names::references_statement), "en",
              "This text references another statement.");
  catalog.set(slot_of(counter, slot_names::referenced_is_hate), "en",
              "The referenced statement is hate speech.");
  catalog.set(slot_of(counter, slot_names::opposes_referenced), "en",
              "This text opposes the referenced statement.");
  return catalog;
}

void check_catalog(const HypothesisCatalog& catalog, const StrategyConfig& config) {
  catalog.validate();
  for (Strategy s : config.enabled) {
    for (const auto& slot : strategy_slots(s, config)) {
      if (catalog.find(slot, catalog.default_language()) == nullptr) {
        throw Error(ErrorKind::config, "catalog lacks " + catalog.default_language() +
                                           " text for slot " + slot.key());
      }
    }
  }
}

FilterOutcome filter_by_target(std::string_view premise, const AuxContext& aux,
                               const StrategyConfig& config) {
  FilterOutcome outcome;
  outcome.strategy = Strategy::filter_by_target;
  double max_entailment = 0.0;
  for (const auto& slot : strategy_slots(Strategy::filter_by_target, config)) {
    max_entailment = std::max(max_entailment, score_slot(slot, premise, aux, outcome).entailment);
  }
  outcome.fired = !outcome.slot_scores.empty() && max_entailment < config.tau_target;
  return outcome;
}

FilterOutcome filter_reclaimed_slurs(std::string_view premise, const AuxContext& aux,
                                     const StrategyConfig& config) {
  FilterOutcome outcome;
  outcome.strategy = Strategy::filter_reclaimed_slurs;
  bool match = false;
  if (const auto it = config.slur_lexicon.find(aux.language); it != config.slur_lexicon.end()) {
    match = std::any_of(it->second.begin(), it->second.end(),
                        [&](const std::string& term) { return contains_term(premise, term); });
  }
  outcome.lexicon_match = match;
  if (!match) return outcome;
  for (const auto& slot : strategy_slots(Strategy::filter_reclaimed_slurs, config)) {
    if (score_slot(slot, premise, aux, outcome).entailment > config.tau_slur) {
      outcome.fired = true;
    }
  }
  return outcome;
}

FilterOutcome filter_counterspeech(std::string_view premise, const AuxContext& aux,
                                   const StrategyConfig& config) {
  FilterOutcome outcome;
  outcome.strategy = Strategy::filter_counterspeech;
  bool all_above = true;
  for (const auto& slot : strategy_slots(Strategy::filter_counterspeech, config)) {
    if (!(score_slot(slot, premise, aux, outcome).entailment > config.tau_counter)) {
      all_above = false;
    }
  }
  outcome.fired = all_above;
  return outcome;
}

FilterOutcome run_filter(Strategy strategy, std::string_view premise, const AuxContext& aux,
                         const StrategyConfig& config) {
  switch (strategy) {
    case Strategy::filter_by_target:
      return filter_by_target(premise, aux, config);
    case Strategy::filter_reclaimed_slurs:
      return filter_reclaimed_slurs(premise, aux, config);
    case Strategy::filter_counterspeech:
      return filter_counterspeech(premise, aux, config);
  }
  return {};
}

ClassificationTrace classify_with_strategies(const StrategyInput& input,
                                             const InferenceBackend& main_backend,
                                             const InferenceBackend& aux_backend,
                                             const HypothesisCatalog& catalog,
                                             const DecisionPolicy& policy,
                                             const StrategyConfig& config,
                                             ModelKind model_kind) {
  const std::string premise = normalize(input.text);
  const MainPrediction main =
      classify_premise(main_backend, catalog, policy, premise, input.language, model_kind);

  ClassificationTrace trace;
  trace.input_id = std::string(input.id);
  trace.language = std::string(input.language);
  trace.main_scores = main.scores;
  trace.main_label = main.label;
  trace.final_label = main.label;
  if (main.label == HateLabel::not_hate) return trace;

  trace.aux_skipped = false;
  const AuxContext aux{aux_backend, catalog, input.language, model_kind};
  for (Strategy s : kAllStrategies) {
    if (!config.is_enabled(s)) continue;
    FilterOutcome outcome = run_filter(s, premise, aux, config);
    for (auto& slot_score : outcome.slot_scores) trace.aux_scores.push_back(std::move(slot_score));
    if (outcome.lexicon_match) trace.slur_lexicon_match = outcome.lexicon_match;
    if (outcome.fired) trace.fired_filters.push_back(s);
  }
  if (!trace.fired_filters.empty()) trace.final_label = HateLabel::not_hate;
  return trace;
}

ClassificationTrace classify_standard(const StrategyInput& input,
                                      const InferenceBackend& backend,
                                      const HypothesisCatalog& catalog,
                                      const DecisionPolicy& policy, ModelKind model_kind) {
  const MainPrediction main =
      classify_main(backend, catalog, policy, input.text, input.language, model_kind);
  ClassificationTrace trace;
  trace.input_id = std::string(input.id);
  trace.language = std::string(input.language);
  trace.main_scores = main.scores;
  trace.main_label = main.label;
  trace.final_label = main.label;
  return trace;
}

}  // namespace hsnli
