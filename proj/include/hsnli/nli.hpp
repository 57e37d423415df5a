#pragma once

#include <string>
#include <string_view>

#include "hsnli/labels.hpp"

namespace hsnli {

struct NliScores {
  double entailment = 0.0;
  double neutral = 0.0;
  double contradiction = 0.0;

  friend bool operator==(const NliScores&, const NliScores&) = default;
};

inline constexpr double kScoreSumTolerance = 1e-6;

// Each probability in [0,1] and the three summing to 1 within `tolerance`.
bool is_valid(const NliScores& scores, double tolerance = kScoreSumTolerance);

enum class ModelKind { monolingual, multilingual };

std::string_view to_string(ModelKind kind);

// Contract for anything that scores a premise-hypothesis pair. Tokenization
// and truncation belong to the implementation. `score` must be deterministic
// for a loaded model and safe to call concurrently.
class InferenceBackend {
 public:
  virtual ~InferenceBackend() = default;

  virtual std::string identity() const = 0;
  virtual NliScores score(std::string_view premise, std::string_view hypothesis) const = 0;
};

// Calls the backend and checks the result. Any failure is rethrown as a
// backend error that names the backend.
NliScores score_pair(const InferenceBackend& backend, std::string_view premise,
                     std::string_view hypothesis);

enum class DecisionRule { argmax, renormalized_threshold };

struct DecisionPolicy {
  DecisionRule rule = DecisionRule::argmax;
  // Only read by renormalized_threshold.
  double threshold = 0.5;

  void validate() const;
};

std::string_view to_string(DecisionRule rule);

// argmax: hate iff entailment strictly beats both other classes.
// renormalized_threshold: hate iff e / (e + c) > threshold.
// Ties, and e + c == 0, go to not_hate.
HateLabel decide(const NliScores& scores, const DecisionPolicy& policy);

}  // namespace hsnli
