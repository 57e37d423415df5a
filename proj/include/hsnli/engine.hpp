#pragma once

#include <string_view>

#include "hsnli/catalog.hpp"
#include "hsnli/nli.hpp"

namespace hsnli {

struct MainPrediction {
  HateLabel label = HateLabel::not_hate;
  NliScores scores;
};

// Scores `premise` as given against the main hypothesis. Callers that already
// normalized the text use this to avoid normalizing twice.
MainPrediction classify_premise(const InferenceBackend& backend,
                                const HypothesisCatalog& catalog,
                                const DecisionPolicy& policy, std::string_view premise,
                                std::string_view language, ModelKind model_kind);

// normalize -> resolve main hypothesis -> score -> decide.
MainPrediction classify_main(const InferenceBackend& backend, const HypothesisCatalog& catalog,
                             const DecisionPolicy& policy, std::string_view text,
                             std::string_view language, ModelKind model_kind);

}  // namespace hsnli
