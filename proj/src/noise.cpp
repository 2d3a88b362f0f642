#include "iterfilter/noise.hpp"

#include "iterfilter/error.hpp"
#include "iterfilter/rng.hpp"

#include <cmath>

namespace iterfilter::noise {

namespace {

// Lower Cholesky factor of [[1,-1/2,-1/4],[-1/2,1,-1/4],[-1/4,-1/4,1]].
struct AnisotropicFactor {
    double l00, l10, l11, l20, l21, l22;
};

AnisotropicFactor anisotropic_factor() {
    AnisotropicFactor f{};
    f.l00 = 1.0;
    f.l10 = -0.5;
    f.l11 = std::sqrt(1.0 - 0.25);
    f.l20 = -0.25;
    f.l21 = (-0.25 - f.l20 * f.l10) / f.l11;
    f.l22 = std::sqrt(1.0 - f.l20 * f.l20 - f.l21 * f.l21);
    return f;
}

} // namespace

std::string to_string(NoiseKind kind) {
    switch (kind) {
    case NoiseKind::IsotropicGaussian: return "isotropic_gaussian";
    case NoiseKind::AnisotropicGaussian: return "anisotropic_gaussian";
    case NoiseKind::Discrete: return "discrete";
    case NoiseKind::Laplace: return "laplace";
    case NoiseKind::UniformSphere: return "uniform_sphere";
    }
    return "unknown";
}

NoiseKind parse_noise_kind(const std::string& name) {
    for (auto k : {NoiseKind::IsotropicGaussian, NoiseKind::AnisotropicGaussian, NoiseKind::Discrete,
                   NoiseKind::Laplace, NoiseKind::UniformSphere})
        if (to_string(k) == name) return k;
    throw InvalidInput("unknown noise kind '" + name + "'");
}

geo::Vec3 sample_displacement(const NoiseSpec& spec, std::uint64_t index) {
    Rng rng = Rng::stream(spec.seed, index);
    const double s = spec.scale;
    switch (spec.kind) {
    case NoiseKind::IsotropicGaussian: {
        const double x = rng.normal();
        const double y = rng.normal();
        const double z = rng.normal();
        return {s * x, s * y, s * z};
    }
    case NoiseKind::AnisotropicGaussian: {
        static const AnisotropicFactor f = anisotropic_factor();
        const double z0 = rng.normal();
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        return {s * (f.l00 * z0), s * (f.l10 * z0 + f.l11 * z1), s * (f.l20 * z0 + f.l21 * z1 + f.l22 * z2)};
    }
    case NoiseKind::Discrete: {
        const double u = rng.uniform();
        const auto slot = static_cast<int>(u * 10.0); // 0..9, each with probability 0.1
        if (slot >= 6) return {0.0, 0.0, 0.0};
        geo::Vec3 d{0.0, 0.0, 0.0};
        d[slot / 2] = (slot % 2 == 0) ? s : -s;
        return d;
    }
    case NoiseKind::Laplace: {
        geo::Vec3 d{};
        for (auto& c : d) {
            const double u = rng.uniform() - 0.5; // [-0.5, 0.5)
            const double mag = -s * std::log1p(-2.0 * std::abs(u));
            c = u < 0.0 ? -mag : mag;
        }
        return d;
    }
    case NoiseKind::UniformSphere: {
        geo::Vec3 dir{};
        double len = 0.0;
        do {
            dir = {rng.normal(), rng.normal(), rng.normal()};
            len = geo::norm(dir);
        } while (len == 0.0);
        // The 1e-15 shrink keeps rounding from pushing |d| past s.
        const double r = s * std::cbrt(rng.uniform()) * (1.0 - 1e-15);
        return (r / len) * dir;
    }
    }
    return {0.0, 0.0, 0.0};
}

geo::PointCloud add_noise(const geo::PointCloud& cloud, const NoiseSpec& spec) {
    if (!(spec.scale >= 0.0) || !std::isfinite(spec.scale))
        throw InvalidInput("noise scale must be a finite non-negative number");
    if (spec.scale == 0.0) return cloud;
    geo::PointCloud out = cloud;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] + sample_displacement(spec, i);
    return out;
}

} // namespace iterfilter::noise
