#include "hsnli/engine.hpp"

#include "hsnli/text.hpp"

namespace hsnli {

MainPrediction classify_premise(const InferenceBackend& backend,
                                const HypothesisCatalog& catalog,
                                const DecisionPolicy& policy, std::string_view premise,
                                std::string_view language, ModelKind model_kind) {
  const std::string& hypothesis =
      resolve_hypothesis(catalog, HypothesisSlot::main(), language, model_kind);
  MainPrediction out;
  out.scores = score_pair(backend, premise, hypothesis);
  out.label = decide(out.scores, policy);
  return out;
}

MainPrediction classify_main(const InferenceBackend& backend, const HypothesisCatalog& catalog,
                             const DecisionPolicy& policy, std::string_view text,
                             std::string_view language, ModelKind model_kind) {
  return classify_premise(backend, catalog, policy, normalize(text), language, model_kind);
}

}  // namespace hsnli
