#pragma once

#include "iterfilter/geometry.hpp"

#include <cstdint>
#include <string>

namespace iterfilter::noise {

enum class NoiseKind { IsotropicGaussian, AnisotropicGaussian, Discrete, Laplace, UniformSphere };

/// `scale` is a fraction of the bounding-sphere radius, so it applies
/// directly to a normalized cloud.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::IsotropicGaussian;
    double scale = 0.0;
    std::uint64_t seed = 0;
};

std::string to_string(NoiseKind kind);
/// Throws InvalidInput for an unknown name.
NoiseKind parse_noise_kind(const std::string& name);

/// Independent per-point perturbation.
///
/// Point i draws from its own stream Rng::stream(seed, i), so the result
/// does not depend on evaluation order. Conventions per kind:
///   - IsotropicGaussian: s * N(0, I)
///   - AnisotropicGaussian: N(0, s^2 * [[1,-1/2,-1/4],[-1/2,1,-1/4],[-1/4,-1/4,1]])
///   - Discrete: +-s along one axis with probability 0.1 each, zero with 0.4
///   - Laplace: independent axes with Laplace scale parameter b = s
///   - UniformSphere: uniform in the ball of radius s
geo::PointCloud add_noise(const geo::PointCloud& cloud, const NoiseSpec& spec);

/// One displacement sample for point `index` (the building block of add_noise).
geo::Vec3 sample_displacement(const NoiseSpec& spec, std::uint64_t index);

} // namespace iterfilter::noise
