#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hsnli/nli.hpp"

namespace hsnli {

// Exported model directory:
//   metadata.json   {"format": "hsnli-nli-model", "version": 1,
//                    "identity": str, "model_file": "model.onnx",
//                    "tokenizer_file": "tokenizer.json",
//                    "label_indices": {"entailment": i, "neutral": j,
//                                      "contradiction": k},
//                    "max_length": 128, "model_kind": "multilingual",
//                    "inputs": ["input_ids", "attention_mask"],
//                    "output": "logits"}
//   model.onnx      network producing [batch, 3] logits
//   tokenizer.json  tokenizer definition (see tokenizer.hpp)
struct ModelMetadata {
  std::string identity;
  std::filesystem::path model_file;
  std::filesystem::path tokenizer_file;
  // Output position of entailment, neutral and contradiction.
  std::array<std::size_t, 3> label_indices = {0, 1, 2};
  std::size_t max_length = 128;
  ModelKind model_kind = ModelKind::multilingual;
  std::vector<std::string> inputs = {"input_ids", "attention_mask"};
  std::string output = "logits";
};

inline constexpr std::string_view kModelFormat = "hsnli-nli-model";

ModelMetadata parse_model_metadata(std::string_view json_text);

// Reads metadata.json and checks that the model and tokenizer files exist.
// Paths in the result are absolute within `dir`.
ModelMetadata load_model_directory(const std::filesystem::path& dir);

// Softmax over the three logits, reordered through `label_indices`.
NliScores scores_from_logits(std::span<const float> logits,
                             const std::array<std::size_t, 3>& label_indices);

bool onnxruntime_available();

// ONNX Runtime backend for an exported directory. Throws a backend error when
// the library was built without ONNX Runtime.
std::shared_ptr<const InferenceBackend> load_model_backend(const std::filesystem::path& dir);

}  // namespace hsnli
