#include "onnx_backend.hpp"

#include <mutex>

#include <onnxruntime_cxx_api.h>

#include "hsnli/error.hpp"
#include "hsnli/tokenizer.hpp"

namespace hsnli::detail {
namespace {

class OnnxBackend final : public InferenceBackend {
 public:
  explicit OnnxBackend(ModelMetadata meta)
      : meta_(std::move(meta)),
        tokenizer_(Tokenizer::load(meta_.tokenizer_file)),
        env_(ORT_LOGGING_LEVEL_WARNING, "hsnli"),
        session_(env_, meta_.model_file.c_str(), options()) {}

  std::string identity() const override { return meta_.identity; }

  NliScores score(std::string_view premise, std::string_view hypothesis) const override {
    const Encoding enc = tokenizer_.encode_pair(premise, hypothesis, meta_.max_length);
    const std::array<std::int64_t, 2> shape = {1, static_cast<std::int64_t>(enc.ids.size())};
    const auto memory = Ort::MemoryInfo::CreateCpu(OrtArenaAllocator, OrtMemTypeDefault);

    std::vector<Ort::Value> inputs;
    std::vector<const char*> names;
    for (const auto& name : meta_.inputs) {
      const std::vector<std::int64_t>* data = nullptr;
      if (name == "input_ids") data = &enc.ids;
      if (name == "attention_mask") data = &enc.attention_mask;
      if (name == "token_type_ids") data = &enc.type_ids;
      if (data == nullptr) throw Error(ErrorKind::backend, "unknown model input " + name);
      inputs.push_back(Ort::Value::CreateTensor<std::int64_t>(
          memory, const_cast<std::int64_t*>(data->data()), data->size(), shape.data(),
          shape.size()));
      names.push_back(name.c_str());
    }
    const char* output = meta_.output.c_str();
    std::vector<Ort::Value> result;
    try {
      std::lock_guard lock(mutex_);
      result = session_.Run(Ort::RunOptions{nullptr}, names.data(), inputs.data(),
                            inputs.size(), &output, 1);
    } catch (const Ort::Exception& e) {
      throw Error(ErrorKind::backend, e.what());
    }
    const float* logits = result.front().GetTensorData<float>();
    const std::size_t count = result.front().GetTensorTypeAndShapeInfo().GetElementCount();
    return scores_from_logits({logits, count}, meta_.label_indices);
  }

 private:
  static Ort::SessionOptions options() {
    Ort::SessionOptions o;
    o.SetIntraOpNumThreads(1);
    return o;
  }

  ModelMetadata meta_;
  Tokenizer tokenizer_;
  Ort::Env env_;
  mutable Ort::Session session_;
  mutable std::mutex mutex_;
};

}  // namespace

std::shared_ptr<const InferenceBackend> make_onnx_backend(ModelMetadata meta) {
  try {
    return std::make_shared<const OnnxBackend>(std::move(meta));
  } catch (const Ort::Exception& e) {
    throw Error(ErrorKind::backend, e.what());
  }
}

}  // namespace hsnli::detail
