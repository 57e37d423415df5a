#pragma once

#include <memory>

#include "hsnli/model.hpp"

namespace hsnli::detail {

std::shared_ptr<const InferenceBackend> make_onnx_backend(ModelMetadata meta);

}  // namespace hsnli::detail
