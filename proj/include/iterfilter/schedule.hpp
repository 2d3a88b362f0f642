#pragma once

#include <cstddef>
#include <vector>

namespace iterfilter::filter {

/// Target noise levels for the adaptive ground truth: sigma_{t+1} = sigma_t / delta
/// with delta = 16 / T, and the last level pinned to exactly zero.
struct NoiseSchedule {
    double sigma0 = 0.0;
    std::size_t iterations = 0;
    double delta = 0.0;
    std::vector<double> sigmas; // sigma_1 .. sigma_T
};

/// Requires sigma0 > 0 and 2 <= T <= 12; throws InvalidInput otherwise.
NoiseSchedule noise_schedule(double sigma0, std::size_t iterations);

} // namespace iterfilter::filter
