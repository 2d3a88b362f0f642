#pragma once

#include "iterfilter/model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace iterfilter::filter {

/// Checkpoint layout (JSON, version 1):
///
///   {
///     "format": "iterfilter-checkpoint",
///     "version": 1,
///     "model": {"iterations": T, "k": 32, "encoder_dims": [...], "decoder_dims": [...],
///               "output_init_scale": 0.01},
///     "config": {...},                          // free-form run config snapshot
///     "parameters": [{"name": "...", "shape": [...], "data": [...]}, ...]
///   }
///
/// Parameters appear in IterativePFNParams::named_parameters() order.
/// Doubles are written in shortest round-trip form, so save -> load is exact.
nlohmann::json checkpoint_to_json(const IterativePFNParams& params, const nlohmann::json& config = nlohmann::json::object());
IterativePFNParams checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const IterativePFNParams& params,
                     const nlohmann::json& config = nlohmann::json::object());
IterativePFNParams load_checkpoint(const std::filesystem::path& path);

nlohmann::json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

} // namespace iterfilter::filter
