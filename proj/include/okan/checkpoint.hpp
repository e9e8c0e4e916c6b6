#pragma once

#include <filesystem>

#include "okan/model.hpp"

namespace okan::nn {

/// JSON file with the model name, its describe() block and every named parameter.
void save_checkpoint(const Model& model, const std::filesystem::path& path);

/// Overwrites the model's parameters in place. Names, shapes and the model
/// name must match; throws ParseError otherwise.
void load_checkpoint(Model& model, const std::filesystem::path& path);

}  // namespace okan::nn
