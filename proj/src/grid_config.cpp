#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "hsnli/error.hpp"
#include "hsnli/grid.hpp"
#include "hsnli/io.hpp"
#include "hsnli/random.hpp"
#include "toml_util.hpp"

namespace hsnli {
namespace {

const char* const kEnglishDatasets[] = {"DEN", "FEN", "KEN"};

std::filesystem::path resolve_path(const std::filesystem::path& base,
                                   const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

}  // namespace

std::string_view to_string(EvalMode mode) {
  return mode == EvalMode::standard ? "standard" : "strategies";
}

std::string_view to_string(TestSet set) {
  return set == TestSet::held_out ? "held_out" : "hatecheck";
}

std::optional<TestSet> parse_test_set(std::string_view text) {
  if (text == "held_out") return TestSet::held_out;
  if (text == "hatecheck") return TestSet::hatecheck;
  return std::nullopt;
}

ModelVariant ModelVariant::parse(std::string_view tag, EvalMode mode) {
  std::string compact;
  for (char c : tag) {
    if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
  }
  std::vector<std::string> parts;
  std::stringstream ss(compact);
  std::string part;
  while (std::getline(ss, part, '+')) parts.push_back(part);
  auto bad = [&](const std::string& why) {
    return Error(ErrorKind::config, "bad model variant \"" + std::string(tag) + "\": " + why);
  };
  if (parts.empty()) throw bad("empty tag");

  ModelVariant v;
  v.mode = mode;
  if (parts[0] == "M") {
    v.base = ModelKind::monolingual;
  } else if (parts[0] == "X") {
    v.base = ModelKind::multilingual;
  } else {
    throw bad("base model must be M or X");
  }
  std::size_t i = 1;
  if (i < parts.size() && (parts[i] == "NLI" || parts[i] == "XNLI")) {
    v.nli = parts[i] == "NLI" ? NliStage::target_language : NliStage::xnli;
    if (v.nli == NliStage::xnli && v.base == ModelKind::monolingual) {
      throw bad("full XNLI training needs the multilingual base");
    }
    ++i;
  }
  if (i < parts.size()) {
    const bool known = std::find(std::begin(kEnglishDatasets), std::end(kEnglishDatasets),
                                 parts[i]) != std::end(kEnglishDatasets);
    if (!known) throw bad("unknown phase \"" + parts[i] + "\"");
    if (v.base == ModelKind::monolingual) {
      throw bad("English hate-speech training needs the multilingual base");
    }
    v.english_hs = parts[i];
    ++i;
  }
  if (i != parts.size()) throw bad("trailing phases");
  if (mode == EvalMode::strategies && !v.nli_trained()) {
    throw bad("strategies mode requires an NLI-trained variant");
  }
  return v;
}

std::string ModelVariant::nli_base_tag() const {
  std::string out = base == ModelKind::monolingual ? "M" : "X";
  if (nli == NliStage::target_language) out += "+NLI";
  if (nli == NliStage::xnli) out += "+XNLI";
  return out;
}

std::string ModelVariant::tag() const {
  std::string out = nli_base_tag();
  if (!english_hs.empty()) out += "+" + english_hs;
  return out;
}

std::string ModelVariant::label() const {
  return mode == EvalMode::strategies ? tag() + " [strategies]" : tag();
}

std::string ExperimentCell::key() const {
  std::ostringstream out;
  out << variant.label() << "|" << language << "|" << n_shot << "|" << to_string(test_set);
  return out.str();
}

std::vector<ExperimentCell> enumerate_cells(const GridConfig& config) {
  std::vector<ExperimentCell> cells;
  for (std::size_t v = 0; v < config.variants.size(); ++v) {
    for (const auto& lang : config.languages) {
      for (std::size_t n : config.n_shots) {
        for (TestSet t : config.test_sets) {
          cells.push_back({v, config.variants[v].variant, lang.code, n, t});
        }
      }
    }
  }
  return cells;
}

void GridConfig::validate() const {
  if (variants.empty() || languages.empty() || n_shots.empty() || test_sets.empty()) {
    throw Error(ErrorKind::config, "empty grid: variants, languages, n_shots and test_sets "
                                   "must all be non-empty");
  }
  if (runs == 0) throw Error(ErrorKind::config, "runs must be >= 1");
  if (resamples == 0) throw Error(ErrorKind::config, "resamples must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::config, "alpha must lie in (0,1)");
  policy.validate();
  for (std::size_t i = 0; i < variants.size(); ++i) {
    for (std::size_t j = i + 1; j < variants.size(); ++j) {
      if (variants[i].variant == variants[j].variant) {
        throw Error(ErrorKind::config, "duplicate variant " + variants[i].variant.label());
      }
    }
  }
}

GridConfig GridConfig::parse(std::string_view toml_text, const std::filesystem::path& base_dir) {
  const toml::table doc = detail::parse_toml(toml_text, "grid config");
  GridConfig c;
  auto read_size = [&](const char* key, std::size_t& target) {
    if (const auto v = doc[key].value<std::int64_t>()) {
      if (*v < 0) throw Error(ErrorKind::config, std::string(key) + " must be >= 0");
      target = static_cast<std::size_t>(*v);
    }
  };
  read_size("runs", c.runs);
  read_size("resamples", c.resamples);
  c.alpha = doc["alpha"].value_or(c.alpha);
  if (const auto v = doc["seed"].value<std::int64_t>()) c.seed = static_cast<std::uint64_t>(*v);
  if (const toml::array* arr = doc["n_shots"].as_array()) {
    c.n_shots.clear();
    for (const auto& item : *arr) {
      const auto n = item.value<std::int64_t>();
      if (!n || *n < 0) throw Error(ErrorKind::config, "n_shots must be non-negative integers");
      c.n_shots.push_back(static_cast<std::size_t>(*n));
    }
  }
  if (doc.contains("test_sets")) {
    c.test_sets.clear();
    for (const auto& name : detail::string_array(doc["test_sets"], "test_sets")) {
      const auto t = parse_test_set(name);
      if (!t) throw Error(ErrorKind::config, "unknown test set \"" + name + "\"");
      c.test_sets.push_back(*t);
    }
  }
  if (const auto unit = doc["bootstrap"].value<std::string>()) {
    if (*unit == "runs") {
      c.bootstrap = BootstrapUnit::runs;
    } else if (*unit == "items") {
      c.bootstrap = BootstrapUnit::items;
    } else {
      throw Error(ErrorKind::config, "bootstrap must be \"runs\" or \"items\"");
    }
  }
  c.stratified_sampling = doc["stratified_sampling"].value_or(false);
  c.write_samples = doc["write_samples"].value_or(false);
  c.backend = doc["backend"].value_or(c.backend);
  c.aux_backend = doc["aux_backend"].value_or(std::string{});
  if (const auto p = doc["catalog"].value<std::string>()) c.catalog = resolve_path(base_dir, *p);
  if (const auto p = doc["strategies"].value<std::string>()) {
    c.strategies = resolve_path(base_dir, *p);
  }
  c.model_dir = resolve_path(base_dir, doc["model_dir"].value_or(std::string{}));
  if (c.model_dir.empty()) c.model_dir = base_dir;
  if (const toml::table* policy = doc["policy"].as_table()) {
    const std::string rule = (*policy)["rule"].value_or(std::string("argmax"));
    if (rule == "argmax") {
      c.policy.rule = DecisionRule::argmax;
    } else if (rule == "renormalized_threshold") {
      c.policy.rule = DecisionRule::renormalized_threshold;
    } else {
      throw Error(ErrorKind::config, "unknown decision rule \"" + rule + "\"");
    }
    c.policy.threshold = (*policy)["threshold"].value_or(c.policy.threshold);
  }
  if (const toml::array* arr = doc["variant"].as_array()) {
    for (const auto& item : *arr) {
      const toml::table* t = item.as_table();
      if (t == nullptr) throw Error(ErrorKind::config, "[[variant]] entries must be tables");
      const auto tag = (*t)["tag"].value<std::string>();
      if (!tag) throw Error(ErrorKind::config, "[[variant]] needs a tag");
      const std::string mode = (*t)["mode"].value_or(std::string("standard"));
      if (mode != "standard" && mode != "strategies") {
        throw Error(ErrorKind::config, "variant mode must be standard or strategies");
      }
      VariantSpec spec;
      spec.variant =
          ModelVariant::parse(*tag, mode == "strategies" ? EvalMode::strategies : EvalMode::standard);
      spec.backend = (*t)["backend"].value_or(std::string{});
      spec.aux_backend = (*t)["aux_backend"].value_or(std::string{});
      c.variants.push_back(std::move(spec));
    }
  }
  if (const toml::array* arr = doc["language"].as_array()) {
    for (const auto& item : *arr) {
      const toml::table* t = item.as_table();
      if (t == nullptr) throw Error(ErrorKind::config, "[[language]] entries must be tables");
      LanguageData lang;
      const auto code = (*t)["code"].value<std::string>();
      if (!code) throw Error(ErrorKind::config, "[[language]] needs a code");
      lang.code = *code;
      lang.corpus = resolve_path(base_dir, (*t)["corpus"].value_or(std::string{}));
      lang.hatecheck = resolve_path(base_dir, (*t)["hatecheck"].value_or(std::string{}));
      lang.held_out_name = (*t)["held_out_name"].value_or(lang.code);
      lang.hatecheck_name = (*t)["hatecheck_name"].value_or("HateCheck_" + lang.code);
      c.languages.push_back(std::move(lang));
    }
  }
  c.validate();
  return c;
}

GridConfig GridConfig::load(const std::filesystem::path& path) {
  try {
    return parse(read_file(path), path.parent_path());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) {
      throw Error(ErrorKind::config, path.string() + ": " + e.what());
    }
    throw;
  }
}

std::string GridConfig::fingerprint() const {
  std::ostringstream s;
  s.precision(17);
  s << "runs=" << runs << ";alpha=" << alpha << ";B=" << resamples << ";seed=" << seed
    << ";bootstrap=" << (bootstrap == BootstrapUnit::runs ? "runs" : "items")
    << ";stratified=" << stratified_sampling << ";rule=" << to_string(policy.rule)
    << ";threshold=" << policy.threshold << ";backend=" << backend << ";aux=" << aux_backend
    << ";catalog=" << catalog.string() << ";strategies=" << strategies.string();
  for (const auto& v : variants) {
    s << ";variant=" << v.variant.label() << "," << v.backend << "," << v.aux_backend;
  }
  for (const auto& l : languages) {
    s << ";lang=" << l.code << "," << l.corpus.string() << "," << l.hatecheck.string();
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(s.str())));
  return buf;
}

}  // namespace hsnli
