#include "hsnli/catalog.hpp"

#include "hsnli/error.hpp"
#include "hsnli/io.hpp"
#include "toml_util.hpp"

namespace hsnli {

HypothesisSlot HypothesisSlot::main() { return {}; }

HypothesisSlot HypothesisSlot::parse(std::string_view key) {
  if (key == "main") return main();
  const auto slash = key.find('/');
  if (slash == std::string_view::npos || slash == 0 || slash + 1 == key.size()) {
    throw Error(ErrorKind::config, "bad hypothesis slot \"" + std::string(key) + "\"");
  }
  return {std::string(key.substr(0, slash)), std::string(key.substr(slash + 1))};
}

std::string HypothesisSlot::key() const {
  return is_main() ? std::string("main") : strategy + "/" + name;
}

HypothesisCatalog::HypothesisCatalog(std::string default_language)
    : default_language_(std::move(default_language)) {}

void HypothesisCatalog::set(const HypothesisSlot& slot, const std::string& language,
                            std::string text) {
  texts_[slot][language] = std::move(text);
}

const std::string* HypothesisCatalog::find(const HypothesisSlot& slot,
                                           std::string_view language) const {
  const auto s = texts_.find(slot);
  if (s == texts_.end()) return nullptr;
  const auto t = s->second.find(language);
  return t == s->second.end() ? nullptr : &t->second;
}

bool HypothesisCatalog::has_slot(const HypothesisSlot& slot) const {
  return texts_.contains(slot);
}

std::vector<HypothesisSlot> HypothesisCatalog::slots() const {
  std::vector<HypothesisSlot> out;
  for (const auto& [slot, texts] : texts_) out.push_back(slot);
  return out;
}

std::map<std::string, std::string> HypothesisCatalog::text_to_slot() const {
  std::map<std::string, std::string> out;
  for (const auto& [slot, texts] : texts_) {
    for (const auto& [lang, text] : texts) out.emplace(text, slot.key());
  }
  return out;
}

void HypothesisCatalog::validate() const {
  if (find(HypothesisSlot::main(), default_language_) == nullptr) {
    throw Error(ErrorKind::config,
                "catalog lacks the main hypothesis in default language " + default_language_);
  }
}

HypothesisCatalog HypothesisCatalog::parse(std::string_view toml_text) {
  const toml::table doc = detail::parse_toml(toml_text, "catalog");
  HypothesisCatalog catalog(doc["default_language"].value_or(std::string("en")));

  auto read_texts = [&](const toml::table& table, const HypothesisSlot& slot) {
    for (const auto& [lang, node] : table) {
      const auto text = node.value<std::string>();
      if (!text) {
        throw Error(ErrorKind::config,
                    "catalog slot " + slot.key() + ": language entries must be strings");
      }
      catalog.set(slot, std::string(lang.str()), *text);
    }
  };

  for (const auto& [key, node] : doc) {
    if (key.str() == "default_language") continue;
    const toml::table* table = node.as_table();
    if (table == nullptr) {
      throw Error(ErrorKind::config,
                  "catalog: unexpected top-level key \"" + std::string(key.str()) + "\"");
    }
    if (key.str() == "main") {
      read_texts(*table, HypothesisSlot::main());
      continue;
    }
    for (const auto& [slot_name, slot_node] : *table) {
      const toml::table* slot_table = slot_node.as_table();
      if (slot_table == nullptr) {
        throw Error(ErrorKind::config, "catalog: [" + std::string(key.str()) + "." +
                                           std::string(slot_name.str()) +
                                           "] must be a table of language -> text");
      }
      read_texts(*slot_table, {std::string(key.str()), std::string(slot_name.str())});
    }
  }
  catalog.validate();
  return catalog;
}

HypothesisCatalog HypothesisCatalog::load(const std::filesystem::path& path) {
  try {
    return parse(read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) {
      throw Error(ErrorKind::config, path.string() + ": " + e.what());
    }
    throw;
  }
}

const std::string& resolve_hypothesis(const HypothesisCatalog& catalog,
                                      const HypothesisSlot& slot, std::string_view language,
                                      ModelKind model_kind) {
  const std::string_view wanted =
      model_kind == ModelKind::multilingual ? std::string_view(catalog.default_language())
                                            : language;
  if (const std::string* text = catalog.find(slot, wanted)) return *text;
  if (!catalog.has_slot(slot)) {
    throw Error(ErrorKind::config, "catalog has no hypothesis slot " + slot.key());
  }
  throw Error(ErrorKind::missing_translation,
              "no " + std::string(wanted) + " translation for hypothesis slot " + slot.key());
}

}  // namespace hsnli
