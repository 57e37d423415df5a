#include "hsnli/mock_backend.hpp"

#include "hsnli/error.hpp"
#include "hsnli/io.hpp"
#include "json.hpp"

namespace hsnli {
namespace {

using nlohmann::json;

NliScores scores_from_json(const json& value, std::size_t line) {
  if (!value.is_array() || value.size() != 3) {
    throw Error(ErrorKind::parse,
                "mock table line " + std::to_string(line) + ": scores must be [e, n, c]");
  }
  NliScores s;
  try {
    s = {value[0].get<double>(), value[1].get<double>(), value[2].get<double>()};
  } catch (const json::exception&) {
    throw Error(ErrorKind::parse,
                "mock table line " + std::to_string(line) + ": scores must be numbers");
  }
  if (!is_valid(s)) {
    throw Error(ErrorKind::parse, "mock table line " + std::to_string(line) +
                                      ": scores are not a probability distribution");
  }
  return s;
}

}  // namespace

MockBackend::MockBackend(std::string identity, std::vector<Rule> rules,
                         std::optional<NliScores> fallback, const HypothesisCatalog* catalog)
    : identity_(std::move(identity)), rules_(std::move(rules)), fallback_(fallback) {
  if (catalog != nullptr) {
    for (auto& [text, slot] : catalog->text_to_slot()) slot_of_text_.emplace(text, slot);
  }
}

MockBackend MockBackend::parse(std::string identity, std::string_view jsonl,
                               const HypothesisCatalog* catalog) {
  std::vector<Rule> rules;
  std::optional<NliScores> fallback;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    const std::size_t end = std::min(jsonl.find('\n', pos), jsonl.size());
    const std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::parse,
                  "mock table line " + std::to_string(line_no) + ": " + e.what());
    }
    if (obj.contains("default")) {
      fallback = scores_from_json(obj["default"], line_no);
      continue;
    }
    Rule rule;
    rule.match = obj.value("match", std::string{});
    rule.slot = obj.value("slot", std::string("*"));
    if (!obj.contains("scores")) {
      throw Error(ErrorKind::parse,
                  "mock table line " + std::to_string(line_no) + ": missing scores");
    }
    rule.scores = scores_from_json(obj["scores"], line_no);
    rules.push_back(std::move(rule));
  }
  return MockBackend(std::move(identity), std::move(rules), fallback, catalog);
}

MockBackend MockBackend::load(const std::filesystem::path& path,
                              const HypothesisCatalog* catalog) {
  try {
    return parse("mock:" + path.filename().string(), read_file(path), catalog);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::parse) {
      throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
    throw;
  }
}

NliScores MockBackend::score(std::string_view premise, std::string_view hypothesis) const {
  const auto slot_it = slot_of_text_.find(hypothesis);
  const std::string_view slot =
      slot_it == slot_of_text_.end() ? std::string_view{} : std::string_view(slot_it->second);
  for (const Rule& rule : rules_) {
    const bool slot_ok = rule.slot == "*" || rule.slot == hypothesis ||
                         (!slot.empty() && rule.slot == slot);
    if (!slot_ok) continue;
    if (rule.match.empty() || rule.match == "*" ||
        premise.find(rule.match) != std::string_view::npos) {
      return rule.scores;
    }
  }
  if (fallback_) return *fallback_;
  throw Error(ErrorKind::backend, "no mock rule for premise \"" + std::string(premise) +
                                      "\" / hypothesis \"" + std::string(hypothesis) + "\"");
}

}  // namespace hsnli
