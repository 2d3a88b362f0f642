#include "iterfilter/error.hpp"
#include "iterfilter/noise.hpp"

#include "support.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace iterfilter;
using noise::NoiseKind;

namespace {

geo::PointCloud origins(std::size_t n) { return geo::PointCloud(std::vector<geo::Vec3>(n, geo::Vec3{})); }

std::array<std::array<double, 3>, 3> covariance(const geo::PointCloud& c) {
    std::array<double, 3> mean{};
    for (const auto& p : c.points)
        for (int a = 0; a < 3; ++a) mean[a] += p[a] / c.size();
    std::array<std::array<double, 3>, 3> cov{};
    for (const auto& p : c.points)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) cov[a][b] += (p[a] - mean[a]) * (p[b] - mean[b]) / (c.size() - 1);
    return cov;
}

} // namespace

TEST_SUITE("noise") {

TEST_CASE("zero scale returns the input exactly; negative scale is rejected") {
    auto c = testing::random_cloud(100, 1);
    for (auto kind : {NoiseKind::IsotropicGaussian, NoiseKind::AnisotropicGaussian, NoiseKind::Discrete, NoiseKind::Laplace,
                      NoiseKind::UniformSphere}) {
        CHECK(noise::add_noise(c, {kind, 0.0, 5}) == c);
        CHECK_THROWS_AS(noise::add_noise(c, {kind, -0.01, 5}), InvalidInput);
    }
}

TEST_CASE("seeded determinism and order independence") {
    auto c = testing::random_cloud(500, 2);
    const noise::NoiseSpec spec{NoiseKind::Laplace, 0.01, 77};
    auto a = noise::add_noise(c, spec);
    CHECK(a == noise::add_noise(c, spec));
    CHECK(!(a == noise::add_noise(c, {NoiseKind::Laplace, 0.01, 78})));
    for (std::size_t i : {0u, 17u, 499u}) CHECK(a[i] == c[i] + noise::sample_displacement(spec, i));
}

TEST_CASE("isotropic std lies in the chi-square band") {
    auto out = noise::add_noise(origins(100000), {NoiseKind::IsotropicGaussian, 0.02, 3});
    auto cov = covariance(out);
    for (int a = 0; a < 3; ++a) {
        const double sd = std::sqrt(cov[a][a]);
        CHECK(sd >= 0.0196);
        CHECK(sd <= 0.0204);
    }
}

TEST_CASE("anisotropic covariance matches the target matrix") {
    const double s = 0.02;
    const double sigma[3][3] = {{1, -0.5, -0.25}, {-0.5, 1, -0.25}, {-0.25, -0.25, 1}};
    auto cov = covariance(noise::add_noise(origins(100000), {NoiseKind::AnisotropicGaussian, s, 4}));
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) CHECK(std::abs(cov[a][b] - s * s * sigma[a][b]) <= 0.05 * s * s);
}

TEST_CASE("discrete noise has seven values with the tabulated frequencies") {
    const double s = 0.02;
    auto out = noise::add_noise(origins(100000), {NoiseKind::Discrete, s, 5});
    std::map<std::array<double, 3>, int> counts;
    for (const auto& p : out.points) ++counts[p];
    CHECK(counts.size() == 7);
    CHECK(std::abs(counts[{0.0, 0.0, 0.0}] / 100000.0 - 0.4) < 0.01);
    for (int a = 0; a < 3; ++a) {
        for (double sign : {-1.0, 1.0}) {
            std::array<double, 3> key{0.0, 0.0, 0.0};
            key[a] = sign * s;
            CHECK(std::abs(counts[key] / 100000.0 - 0.1) < 0.01);
        }
    }
}

TEST_CASE("laplace per-axis variance is 2 s^2") {
    const double s = 0.01;
    auto cov = covariance(noise::add_noise(origins(100000), {NoiseKind::Laplace, s, 6}));
    for (int a = 0; a < 3; ++a) CHECK(std::abs(cov[a][a] / (2 * s * s) - 1.0) < 0.05);
}

TEST_CASE("uniform sphere stays inside the ball and fills it uniformly") {
    const double s = 0.03;
    auto out = noise::add_noise(origins(100000), {NoiseKind::UniformSphere, s, 7});
    std::size_t inner = 0;
    for (const auto& p : out.points) {
        const double r = geo::norm(p);
        CHECK(r <= s);
        inner += r <= s * std::cbrt(0.5);
    }
    // half the volume lies within radius s * 2^(-1/3)
    CHECK(std::abs(inner / 100000.0 - 0.5) < 0.01);
    auto cov = covariance(out);
    for (int a = 0; a < 3; ++a) CHECK(std::abs(cov[a][a] / (s * s / 5.0) - 1.0) < 0.03); // E[x^2] = s^2 / 5
}

TEST_CASE("kind names round trip") {
    for (auto kind : {NoiseKind::IsotropicGaussian, NoiseKind::AnisotropicGaussian, NoiseKind::Discrete, NoiseKind::Laplace,
                      NoiseKind::UniformSphere})
        CHECK(noise::parse_noise_kind(noise::to_string(kind)) == kind);
    CHECK_THROWS_AS(noise::parse_noise_kind("pink"), InvalidInput);
}

} // TEST_SUITE
