#pragma once

#include "iterfilter/metrics.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace iterfilter::cli {

/// Flags that override or supplement a command's JSON config.
struct Overrides {
    unsigned threads = 1;
    std::optional<std::size_t> external_iterations;
    std::optional<std::uint64_t> seed; // usually taken from ITERFILTER_SEED
};

/// Reads ITERFILTER_SEED; an unparsable value is a ConfigError.
std::optional<std::uint64_t> seed_from_environment();

/// Parses a JSON config file. Syntax errors are ConfigError.
nlohmann::json load_config(const std::filesystem::path& path);

/// Writes the four analytic meshes as OFF files into `dir`.
std::vector<std::filesystem::path> write_builtin_shapes(const std::filesystem::path& dir);

/// Config keys:
///   mesh_dir (required)     directory of *.off meshes, processed in name order
///   output_dir (required)
///   resolutions             point counts per mesh, default [2000]
///   seed                    default 0
///   noise                   list of {kind, scale, seed}; writes noisy copies
///
/// Writes clouds/<stem>_<n>.xyz, meshes/<stem>_<n>.off (mesh in the cloud's
/// normalized frame), noisy/<stem>_<n>_<kind>_<scale>.xyz, and manifest.json.
/// Nothing is written when validation or mesh loading fails.
nlohmann::json cmd_prepare(const nlohmann::json& config, const Overrides& overrides = {});

/// Config keys: dataset (manifest path, required), output_dir (required),
/// resume, debug_zero_checkpoint, plus the TrainingConfig fields epochs,
/// steps_per_epoch, learning_rate, batch_size, seed, patch_size,
/// target_size, sigma_min, sigma_max, loss ("adaptive" | "fixed") and model
/// {iterations, k, encoder_dims, decoder_dims, output_init_scale}.
///
/// Writes checkpoint.json, train_log.csv and resolved_config.json. Refuses
/// to overwrite an existing checkpoint unless resume is set, in which case
/// training continues from it.
nlohmann::json cmd_train(const nlohmann::json& config, const Overrides& overrides = {});

/// Config keys: checkpoint, input, output (required); patch_size (default
/// 1000), seed, selection ("gaussian" | "nearest_reference"),
/// external_iterations (default 1).
nlohmann::json cmd_filter(const nlohmann::json& config, const Overrides& overrides = {});

/// Config keys: filtered, clean, mesh, report (required); histogram_csv,
/// bins (default 50), manifest. With a manifest, clean+mesh must be one of
/// its entries and the filtered cloud must have the entry's resolution.
nlohmann::json cmd_eval(const nlohmann::json& config, const Overrides& overrides = {});

/// Config keys: dataset, output_dir (required); iterations (default
/// [1, 2, 4, 8]), losses (default ["adaptive", "fixed"]), noise (default one
/// isotropic 2.5% spec), patch_size for filtering (default: training
/// patch_size), selection, training (TrainingConfig fields as in cmd_train).
///
/// Trains every (T, loss) pair, filters each dataset cloud under every noise
/// spec, and writes ablation.csv with the mean CD and P2M (x 1e5).
nlohmann::json cmd_ablate(const nlohmann::json& config, const Overrides& overrides = {});

} // namespace iterfilter::cli
