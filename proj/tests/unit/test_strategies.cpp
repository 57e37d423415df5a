#include <gtest/gtest.h>

#include <fstream>

#include <map>

#include "hsnli/error.hpp"
#include "hsnli/strategies.hpp"
#include "support/temp_dir.hpp"

namespace {

using namespace hsnli;

// Entailment per hypothesis text; anything unlisted gets `fallback_e`.
class SlotBackend final : public InferenceBackend {
 public:
  std::map<std::string, double, std::less<>> entailment;
  double fallback_e = 0.0;
  mutable int calls = 0;

  std::string identity() const override { return "slots"; }
  NliScores score(std::string_view, std::string_view hypothesis) const override {
    ++calls;
    const auto it = entailment.find(hypothesis);
    const double e = it == entailment.end() ? fallback_e : it->second;
    return {e, 0.0, 1.0 - e};
  }
};

const HypothesisCatalog& catalog() {
  static const HypothesisCatalog c = default_hypothesis_catalog();
  return c;
}

std::string text_of(Strategy s, std::string_view slot) {
  return *catalog().find(HypothesisSlot{std::string(to_string(s)), std::string(slot)}, "en");
}

void set_target(SlotBackend& b, double e) {
  for (const auto& c : default_characteristics()) {
    b.entailment["This text is about " + c + "."] = e;
  }
}

AuxContext ctx(const SlotBackend& b, std::string_view lang = "en") {
  return {b, catalog(), lang, ModelKind::multilingual};
}

TEST(FilterByTarget, Rules) {
  const StrategyConfig config;
  SlotBackend b;
  set_target(b, 0.1);
  EXPECT_TRUE(filter_by_target("x", ctx(b), config).fired);
  b.entailment["This text is about gender."] = 0.9;
  EXPECT_FALSE(filter_by_target("x", ctx(b), config).fired);
  set_target(b, 0.5);
  EXPECT_FALSE(filter_by_target("x", ctx(b), config).fired);
  EXPECT_EQ(filter_by_target("x", ctx(b), config).slot_scores.size(), 6u);
}

TEST(FilterReclaimedSlurs, GatedOnLexicon) {
  StrategyConfig config;
  config.slur_lexicon["en"] = {"slurword"};
  SlotBackend b;
  const auto self = text_of(Strategy::filter_reclaimed_slurs, slot_names::self_reference);
  const auto pos = text_of(Strategy::filter_reclaimed_slurs, slot_names::positive_sentiment);
  b.entailment[self] = 0.8;
  b.entailment[pos] = 0.0;
  EXPECT_FALSE(filter_reclaimed_slurs("nothing here", ctx(b), config).fired);
  EXPECT_EQ(filter_reclaimed_slurs("nothing here", ctx(b), config).lexicon_match, false);
  EXPECT_TRUE(filter_reclaimed_slurs("I am a SlurWord", ctx(b), config).fired);
  EXPECT_FALSE(filter_reclaimed_slurs("I am a slurword", ctx(b, "es"), config).fired);
  b.entailment[self] = 0.2;
  b.entailment[pos] = 0.2;
  EXPECT_FALSE(filter_reclaimed_slurs("I am a slurword", ctx(b), config).fired);
  b.entailment[pos] = 0.6;
  EXPECT_TRUE(filter_reclaimed_slurs("I am a slurword", ctx(b), config).fired);
}

TEST(FilterCounterspeech, Rules) {
  const StrategyConfig config;
  SlotBackend b;
  const Strategy s = Strategy::filter_counterspeech;
  auto set = [&](double a, double h, double o) {
    b.entailment[text_of(s, slot_names::references_statement)] = a;
    b.entailment[text_of(s, slot_names::referenced_is_hate)] = h;
    b.entailment[text_of(s, slot_names::opposes_referenced)] = o;
  };
  set(0.9, 0.9, 0.9);
  EXPECT_TRUE(filter_counterspeech("x", ctx(b), config).fired);
  set(0.9, 0.9, 0.1);
  EXPECT_FALSE(filter_counterspeech("x", ctx(b), config).fired);
  set(0.5, 0.5, 0.5);
  EXPECT_FALSE(filter_counterspeech("x", ctx(b), config).fired);
}

TEST(Combinator, MainNotHateSkipsFilters) {
  SlotBackend main;
  main.entailment[std::string(kMainHypothesis)] = 0.1;
  SlotBackend aux;
  const auto trace = classify_with_strategies({"a", "text", "en"}, main, aux, catalog(), {},
                                              StrategyConfig{}, ModelKind::multilingual);
  EXPECT_EQ(trace.final_label, HateLabel::not_hate);
  EXPECT_TRUE(trace.fired_filters.empty());
  EXPECT_TRUE(trace.aux_skipped);
  EXPECT_EQ(aux.calls, 0);
}

TEST(Combinator, OnlyTargetFires) {
  SlotBackend main;
  main.entailment[std::string(kMainHypothesis)] = 0.9;
  SlotBackend aux;
  set_target(aux, 0.1);
  const auto trace = classify_with_strategies({"a", "text", "en"}, main, aux, catalog(), {},
                                              StrategyConfig{}, ModelKind::multilingual);
  EXPECT_EQ(trace.main_label, HateLabel::hate);
  EXPECT_EQ(trace.final_label, HateLabel::not_hate);
  ASSERT_EQ(trace.fired_filters.size(), 1u);
  EXPECT_EQ(trace.fired_filters[0], Strategy::filter_by_target);
  // Target (6) + counterspeech (3); the slur filter has no lexicon.
  EXPECT_EQ(aux.calls, 9);
  EXPECT_EQ(main.calls, 1);
}

TEST(Combinator, NoFilterFiresKeepsHate) {
  SlotBackend main;
  main.entailment[std::string(kMainHypothesis)] = 0.9;
  SlotBackend aux;
  set_target(aux, 0.9);
  const auto trace = classify_with_strategies({"a", "text", "en"}, main, aux, catalog(), {},
                                              StrategyConfig{}, ModelKind::multilingual);
  EXPECT_EQ(trace.final_label, HateLabel::hate);
  EXPECT_FALSE(trace.aux_skipped);
}

TEST(Combinator, MonolingualMissingTranslationIsAnError) {
  SlotBackend main;
  main.fallback_e = 0.9;
  try {
    classify_with_strategies({"a", "text", "es"}, main, main, catalog(), {}, StrategyConfig{},
                             ModelKind::monolingual);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::missing_translation);
  }
}

TEST(StrategyConfig, ParseAndValidate) {
  test::TempDir dir;
  {
    std::ofstream lex(dir / "es.txt");
    lex << "# comment\nuno\n\ndos\n";
  }
  {
    std::ofstream cfg(dir / "s.toml");
    cfg << "enabled = [\"filter_by_target\", \"filter_reclaimed_slurs\"]\n"
           "[thresholds]\ntarget = 0.3\nslur = 0.7\n"
           "[target]\ncharacteristics = [\"religion\"]\n"
           "[lexicon]\nes = \"es.txt\"\n"
           "[lexicon_terms]\nen = [\"tres\"]\n";
  }
  const auto config = StrategyConfig::load(dir / "s.toml");
  EXPECT_TRUE(config.is_enabled(Strategy::filter_by_target));
  EXPECT_FALSE(config.is_enabled(Strategy::filter_counterspeech));
  EXPECT_DOUBLE_EQ(config.tau_target, 0.3);
  EXPECT_DOUBLE_EQ(config.tau_slur, 0.7);
  EXPECT_DOUBLE_EQ(config.tau_counter, 0.5);
  EXPECT_EQ(config.characteristics, std::vector<std::string>{"religion"});
  EXPECT_EQ(config.slur_lexicon.at("es"), (std::vector<std::string>{"uno", "dos"}));
  EXPECT_EQ(config.slur_lexicon.at("en"), std::vector<std::string>{"tres"});

  EXPECT_THROW(StrategyConfig::parse("[thresholds]\ntarget = 1.5\n"), Error);
  EXPECT_THROW(StrategyConfig::parse("enabled = [\"filter_dehumanizing\"]\n"), Error);
  EXPECT_THROW(StrategyConfig::parse("[target]\ncharacteristics = []\n"), Error);
}

TEST(StrategyConfig, ShippedConfigLoads) {
  const auto config =
      StrategyConfig::load(std::filesystem::path(HSNLI_SOURCE_DIR) / "data/strategies.toml");
  EXPECT_EQ(config.enabled.size(), 3u);
  EXPECT_EQ(config.characteristics, default_characteristics());
}

TEST(StrategyConfig, UnreachableNeverFires) {
  const auto config = StrategyConfig::unreachable();
  SlotBackend b;
  for (double e : {0.0, 0.5, 1.0}) {
    b.fallback_e = e;
    set_target(b, e);
    for (Strategy s : kAllStrategies) EXPECT_FALSE(run_filter(s, "x", ctx(b), config).fired);
  }
}

TEST(Traces, JsonRoundTrip) {
  SlotBackend main;
  main.entailment[std::string(kMainHypothesis)] = 0.9;
  SlotBackend aux;
  set_target(aux, 0.1);
  StrategyConfig config;
  config.slur_lexicon["en"] = {"word"};
  const auto trace = classify_with_strategies({"id1", "a word", "en"}, main, aux, catalog(), {},
                                              config, ModelKind::multilingual);
  const std::string line = trace_to_json(trace, &config);
  EXPECT_NE(line.find("\"tau_target\":0.5"), std::string::npos);
  const auto parsed = parse_traces_jsonl(line + "\n");
  ASSERT_EQ(parsed.size(), 1u);
  const auto& t = parsed[0];
  EXPECT_EQ(t.input_id, "id1");
  EXPECT_EQ(t.final_label, trace.final_label);
  EXPECT_EQ(t.main_label, trace.main_label);
  EXPECT_EQ(t.fired_filters, trace.fired_filters);
  EXPECT_EQ(t.aux_scores.size(), trace.aux_scores.size());
  EXPECT_EQ(t.slur_lexicon_match, std::optional<bool>(true));
}

}  // namespace
