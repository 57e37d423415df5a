#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hsnli/catalog.hpp"
#include "hsnli/nli.hpp"

namespace hsnli {

// Table-driven backend for tests and desk-scale grids.
//
// File format (JSONL), one rule per line:
//   {"match": "<premise substring>", "slot": "<slot key | hypothesis text | *>",
//    "scores": [e, n, c]}
//   {"default": [e, n, c]}
// Rules are tried in file order and the first hit wins; an empty or "*"
// match accepts any premise. Slot keys are mapped to hypothesis texts through
// the catalog given at load time.
class MockBackend final : public InferenceBackend {
 public:
  struct Rule {
    std::string match;
    std::string slot;
    NliScores scores;
  };

  MockBackend(std::string identity, std::vector<Rule> rules,
              std::optional<NliScores> fallback, const HypothesisCatalog* catalog = nullptr);

  static MockBackend load(const std::filesystem::path& path,
                          const HypothesisCatalog* catalog = nullptr);
  static MockBackend parse(std::string identity, std::string_view jsonl,
                           const HypothesisCatalog* catalog = nullptr);

  std::string identity() const override { return identity_; }
  NliScores score(std::string_view premise, std::string_view hypothesis) const override;

  const std::vector<Rule>& rules() const { return rules_; }

 private:
  std::string identity_;
  std::vector<Rule> rules_;
  std::optional<NliScores> fallback_;
  std::map<std::string, std::string, std::less<>> slot_of_text_;
};

}  // namespace hsnli
