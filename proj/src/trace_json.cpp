#include "hsnli/error.hpp"
#include "hsnli/strategies.hpp"
#include "json.hpp"

namespace hsnli {
namespace {

using nlohmann::json;

json scores_json(const NliScores& s) {
  return json::array({s.entailment, s.neutral, s.contradiction});
}

NliScores scores_from(const json& v) {
  if (!v.is_array() || v.size() != 3) throw Error(ErrorKind::parse, "scores must be [e, n, c]");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

HateLabel label_from(const json& v, const char* field) {
  const auto label = parse_hate_label(v.get<std::string>());
  if (!label) throw Error(ErrorKind::parse, std::string("bad label in ") + field);
  return *label;
}

}  // namespace

std::string trace_to_json(const ClassificationTrace& trace, const StrategyConfig* config) {
  json aux = json::object();
  for (const auto& s : trace.aux_scores) aux[s.slot.key()] = scores_json(s.scores);
  json fired = json::array();
  for (Strategy s : trace.fired_filters) fired.push_back(to_string(s));

  json out = {{"input_id", trace.input_id},
              {"language", trace.language},
              {"main_scores", scores_json(trace.main_scores)},
              {"main_label", to_string(trace.main_label)},
              {"aux_skipped", trace.aux_skipped},
              {"aux_scores", std::move(aux)},
              {"fired_filters", std::move(fired)},
              {"final_label", to_string(trace.final_label)}};
  if (trace.slur_lexicon_match) out["slur_lexicon_match"] = *trace.slur_lexicon_match;
  if (config != nullptr) {
    json enabled = json::array();
    for (Strategy s : kAllStrategies) {
      if (config->is_enabled(s)) enabled.push_back(to_string(s));
    }
    out["config"] = {{"enabled", std::move(enabled)},
                     {"tau_target", config->tau_target},
                     {"tau_slur", config->tau_slur},
                     {"tau_counter", config->tau_counter}};
  }
  return out.dump();
}

std::vector<ClassificationTrace> parse_traces_jsonl(std::string_view content) {
  std::vector<ClassificationTrace> traces;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    const std::size_t end = std::min(content.find('\n', pos), content.size());
    const std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const json obj = json::parse(line);
      ClassificationTrace t;
      t.input_id = obj.at("input_id").get<std::string>();
      t.language = obj.value("language", std::string{});
      t.main_scores = scores_from(obj.at("main_scores"));
      t.main_label = label_from(obj.at("main_label"), "main_label");
      t.aux_skipped = obj.value("aux_skipped", true);
      if (const auto it = obj.find("aux_scores"); it != obj.end()) {
        for (const auto& [key, value] : it->items()) {
          t.aux_scores.push_back({HypothesisSlot::parse(key), scores_from(value)});
        }
      }
      if (const auto it = obj.find("slur_lexicon_match"); it != obj.end()) {
        t.slur_lexicon_match = it->get<bool>();
      }
      for (const auto& name : obj.value("fired_filters", json::array())) {
        const auto s = parse_strategy(name.get<std::string>());
        if (!s) throw Error(ErrorKind::parse, "unknown filter " + name.dump());
        t.fired_filters.push_back(*s);
      }
      t.final_label = label_from(obj.at("final_label"), "final_label");
      traces.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::parse, "trace line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::parse, "trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return traces;
}

}  // namespace hsnli
