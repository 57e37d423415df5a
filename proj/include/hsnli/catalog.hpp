#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hsnli/nli.hpp"

namespace hsnli {

inline constexpr std::string_view kMainHypothesis = "This text is hate speech.";

// Identifies one hypothesis: the main one, or an auxiliary slot of a strategy.
// Textual form is "main" or "<strategy>/<slot>".
struct HypothesisSlot {
  std::string strategy;
  std::string name;

  static HypothesisSlot main();
  static HypothesisSlot parse(std::string_view key);

  bool is_main() const { return strategy.empty(); }
  std::string key() const;

  friend auto operator<=>(const HypothesisSlot&, const HypothesisSlot&) = default;
};

class HypothesisCatalog {
 public:
  explicit HypothesisCatalog(std::string default_language = "en");

  // TOML layout: `default_language`, a [main] table of language -> text, and
  // one [<strategy>.<slot>] table of language -> text per auxiliary slot.
  static HypothesisCatalog load(const std::filesystem::path& path);
  static HypothesisCatalog parse(std::string_view toml_text);

  void set(const HypothesisSlot& slot, const std::string& language, std::string text);

  const std::string* find(const HypothesisSlot& slot, std::string_view language) const;
  bool has_slot(const HypothesisSlot& slot) const;
  std::vector<HypothesisSlot> slots() const;

  const std::string& default_language() const { return default_language_; }

  // Every stored hypothesis text mapped back to its slot key.
  std::map<std::string, std::string> text_to_slot() const;

  // Requires the main hypothesis in the default language.
  void validate() const;

 private:
  std::string default_language_;
  std::map<HypothesisSlot, std::map<std::string, std::string, std::less<>>> texts_;
};

// Multilingual models always get the default-language text. Monolingual
// models get the target-language text and a missing_translation error when
// the catalog has none.
const std::string& resolve_hypothesis(const HypothesisCatalog& catalog,
                                      const HypothesisSlot& slot, std::string_view language,
                                      ModelKind model_kind);

}  // namespace hsnli
