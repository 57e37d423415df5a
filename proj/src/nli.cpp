#include "hsnli/nli.hpp"

#include <cmath>
#include <sstream>

#include "hsnli/error.hpp"

namespace hsnli {

bool is_valid(const NliScores& s, double tolerance) {
  for (double p : {s.entailment, s.neutral, s.contradiction}) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) return false;
  }
  return std::abs(s.entailment + s.neutral + s.contradiction - 1.0) <= tolerance;
}

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::monolingual ? "monolingual" : "multilingual";
}

std::string_view to_string(DecisionRule rule) {
  return rule == DecisionRule::argmax ? "argmax" : "renormalized_threshold";
}

NliScores score_pair(const InferenceBackend& backend, std::string_view premise,
                     std::string_view hypothesis) {
  NliScores scores;
  try {
    scores = backend.score(premise, hypothesis);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::backend, "backend " + backend.identity() + ": " + e.what());
  }
  if (!is_valid(scores)) {
    std::ostringstream msg;
    msg << "backend " << backend.identity() << ": invalid scores (" << scores.entailment
        << ", " << scores.neutral << ", " << scores.contradiction << ")";
    throw Error(ErrorKind::backend, msg.str());
  }
  return scores;
}

void DecisionPolicy::validate() const {
  if (rule == DecisionRule::renormalized_threshold && !(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorKind::config, "decision threshold must lie in (0,1)");
  }
}

HateLabel decide(const NliScores& s, const DecisionPolicy& policy) {
  switch (policy.rule) {
    case DecisionRule::argmax:
      return s.entailment > s.neutral && s.entailment > s.contradiction ? HateLabel::hate
                                                                          : HateLabel::not_hate;
    case DecisionRule::renormalized_threshold: {
      const double denom = s.entailment + s.contradiction;
      if (denom <= 0.0) return HateLabel::not_hate;
      return s.entailment / denom > policy.threshold ? HateLabel::hate : HateLabel::not_hate;
    }
  }
  return HateLabel::not_hate;
}

}  // namespace hsnli
