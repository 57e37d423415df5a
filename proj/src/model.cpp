#include "hsnli/model.hpp"

#include <algorithm>
#include <cmath>

#include "hsnli/error.hpp"
#include "hsnli/io.hpp"
#include "json.hpp"
#include "onnx_backend.hpp"

namespace hsnli {

ModelMetadata parse_model_metadata(std::string_view json_text) {
  using nlohmann::json;
  ModelMetadata meta;
  try {
    const json obj = json::parse(json_text);
    if (obj.value("format", std::string{}) != kModelFormat) {
      throw Error(ErrorKind::validation,
                  "metadata format must be \"" + std::string(kModelFormat) + "\"");
    }
    if (obj.value("version", 0) != 1) {
      throw Error(ErrorKind::validation, "unsupported metadata version");
    }
    meta.identity = obj.at("identity").get<std::string>();
    meta.model_file = obj.value("model_file", std::string("model.onnx"));
    meta.tokenizer_file = obj.value("tokenizer_file", std::string("tokenizer.json"));
    const json& idx = obj.at("label_indices");
    meta.label_indices = {idx.at("entailment").get<std::size_t>(),
                          idx.at("neutral").get<std::size_t>(),
                          idx.at("contradiction").get<std::size_t>()};
    auto sorted = meta.label_indices;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::array<std::size_t, 3>{0, 1, 2}) {
      throw Error(ErrorKind::validation, "label_indices must be a permutation of 0, 1, 2");
    }
    meta.max_length = obj.value("max_length", std::size_t{128});
    if (meta.max_length < 8) throw Error(ErrorKind::validation, "max_length too small");
    const std::string kind = obj.value("model_kind", std::string("multilingual"));
    if (kind == "multilingual") {
      meta.model_kind = ModelKind::multilingual;
    } else if (kind == "monolingual") {
      meta.model_kind = ModelKind::monolingual;
    } else {
      throw Error(ErrorKind::validation, "unknown model_kind \"" + kind + "\"");
    }
    if (obj.contains("inputs")) meta.inputs = obj["inputs"].get<std::vector<std::string>>();
    meta.output = obj.value("output", std::string("logits"));
    if (meta.inputs.empty() || meta.inputs.front() != "input_ids") {
      throw Error(ErrorKind::validation, "first model input must be input_ids");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("metadata.json: ") + e.what());
  }
  return meta;
}

ModelMetadata load_model_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::io, dir.string() + " is not a directory");
  }
  ModelMetadata meta;
  try {
    meta = parse_model_metadata(read_file(dir / "metadata.json"));
  } catch (const Error& e) {
    throw Error(e.kind(), dir.string() + ": " + e.what());
  }
  meta.model_file = dir / meta.model_file;
  meta.tokenizer_file = dir / meta.tokenizer_file;
  if (!std::filesystem::is_regular_file(meta.model_file)) {
    throw Error(ErrorKind::io, "missing model file " + meta.model_file.string());
  }
  if (!std::filesystem::is_regular_file(meta.tokenizer_file)) {
    throw Error(ErrorKind::io, "missing tokenizer file " + meta.tokenizer_file.string());
  }
  return meta;
}

NliScores scores_from_logits(std::span<const float> logits,
                             const std::array<std::size_t, 3>& label_indices) {
  if (logits.size() != 3) {
    throw Error(ErrorKind::backend,
                "expected 3 logits, got " + std::to_string(logits.size()));
  }
  const double top = std::max({logits[0], logits[1], logits[2]});
  std::array<double, 3> e{};
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!std::isfinite(logits[i])) throw Error(ErrorKind::backend, "non-finite logit");
    e[i] = std::exp(static_cast<double>(logits[i]) - top);
    sum += e[i];
  }
  return {e[label_indices[0]] / sum, e[label_indices[1]] / sum, e[label_indices[2]] / sum};
}

bool onnxruntime_available() {
#ifdef HSNLI_HAVE_ONNXRUNTIME
  return true;
#else
  return false;
#endif
}

std::shared_ptr<const InferenceBackend> load_model_backend(const std::filesystem::path& dir) {
  ModelMetadata meta = load_model_directory(dir);
#ifdef HSNLI_HAVE_ONNXRUNTIME
  return detail::make_onnx_backend(std::move(meta));
#else
  throw Error(ErrorKind::backend, "cannot run " + meta.model_file.string() +
                                      ": built without ONNX Runtime (HSNLI_WITH_ONNXRUNTIME)");
#endif
}

}  // namespace hsnli
