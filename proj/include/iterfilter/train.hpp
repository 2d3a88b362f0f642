#pragma once

#include "iterfilter/geometry.hpp"
#include "iterfilter/loss.hpp"
#include "iterfilter/model.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace iterfilter::filter {

struct TrainingConfig {
    std::size_t epochs = 100;
    std::size_t steps_per_epoch = 100;
    double learning_rate = 1e-4;
    std::size_t batch_size = 1; // patches per optimizer step
    std::uint64_t seed = 0;
    std::size_t patch_size = graph::default_patch_size;   // |X|
    std::size_t target_size = graph::default_target_size; // |Y|
    double sigma_min = 0.005;
    double sigma_max = 0.02;
    LossKind loss = LossKind::Adaptive;
    ModelConfig model;

    void validate() const;
};

struct StepRecord {
    std::size_t epoch = 0;
    std::size_t step = 0; // global step index
    double loss = 0.0;
    double sigma0 = 0.0; // noise level of the first patch in the batch
    double wall_ms = 0.0;
};

struct TrainingLog {
    std::vector<StepRecord> steps;
    std::vector<double> epoch_mean_loss;

    /// CSV with header "epoch,step,loss,sigma0,wall_ms".
    void write_csv(const std::filesystem::path& path) const;
};

struct TrainingResult {
    IterativePFNParams params;
    TrainingLog log;
};

using StepCallback = std::function<void(const StepRecord&)>;

/// Trains on normalized clean clouds.
///
/// Each step draws, per batch entry, a cloud, sigma0 ~ U[sigma_min,
/// sigma_max], Gaussian corruption, and a reference point; extracts the
/// (noisy, clean) patch pair; runs all modules; and sums the weighted
/// per-iteration loss. Adaptive targets are resampled every step. Gradients
/// are averaged over the batch in a fixed order, so a run is a pure
/// function of (dataset, config). Training starts from a copy of `initial`
/// when given, leaving the caller's tensors untouched.
TrainingResult train(std::span<const geo::PointCloud> dataset, const TrainingConfig& config,
                     std::optional<IterativePFNParams> initial = std::nullopt, const StepCallback& on_step = {});


} // namespace iterfilter::filter
