#pragma once

#include "icc/nn/model.hpp"

#include <string>

namespace icc::nn {

/// Binary model snapshot: magic "ICCS", a format version, the
/// architecture as JSON, then every named tensor (parameters and running
/// buffers) in the model's stable traversal order. Optimizer state is
/// not part of it. Writing the same model twice produces identical
/// bytes, which the tests rely on.
void save_checkpoint(Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

} // namespace icc::nn
