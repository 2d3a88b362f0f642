#include "iterfilter/error.hpp"
#include "iterfilter/loss.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace iterfilter;
using geo::PointCloud;
using geo::Vec3;
using nn::Tensor;

namespace {

Tensor param_from(const std::vector<double>& v) { return Tensor::parameter({v.size() / 3, 3}, v); }

/// Weighted nearest-neighbor regression loss with plain loops.
double naive_loss(const std::vector<std::vector<double>>& d, const std::vector<std::vector<double>>& x,
                  const std::vector<std::vector<Vec3>>& targets, const std::vector<double>& w) {
    double total = 0.0;
    for (std::size_t t = 0; t < d.size(); ++t) {
        const std::size_t n = w.size();
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d2 = 1e300;
            for (std::size_t j = 0; j < targets[t].size(); ++j) {
                double d2 = 0.0;
                for (int a = 0; a < 3; ++a) {
                    const double e = x[t][3 * i + a] - targets[t][j][a];
                    d2 += e * e;
                }
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = j;
                }
            }
            double err = 0.0;
            for (int a = 0; a < 3; ++a) {
                const double want = targets[t][best][a] - x[t][3 * i + a];
                const double e = d[t][3 * i + a] - want;
                err += e * e;
            }
            total += w[i] * err;
        }
    }
    return total;
}

} // namespace

TEST_SUITE("loss") {

TEST_CASE("single point hand cases") {
    const std::vector<double> w{1.0};
    const std::vector<Vec3> y{{0.1, 0.0, 0.0}, {1.0, 1.0, 1.0}};
    std::vector<Tensor> x{Tensor::constant({1, 3}, {0.0, 0.0, 0.0})};
    std::vector<Tensor> d{Tensor::constant({1, 3}, {0.0, 0.0, 0.0})};
    const std::vector<std::vector<Vec3>> targets{y};
    CHECK(filter::loss_adaptive(d, x, targets, w).item() == doctest::Approx(0.01).epsilon(1e-14));

    // three iterations that never move, all regressing to the same clean point
    std::vector<Tensor> x3(3, x[0]), d3(3, d[0]);
    CHECK(filter::loss_fixed(d3, x3, y, w).item() == doctest::Approx(0.03).epsilon(1e-14));

    // moving exactly onto the target costs nothing
    std::vector<Tensor> d_exact{Tensor::constant({1, 3}, {0.1, 0.0, 0.0})};
    CHECK(filter::loss_adaptive(d_exact, x, targets, w).item() == doctest::Approx(0.0).epsilon(1e-300));
}

TEST_CASE("matches a naive loop on random instances") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        Rng rng(seed);
        const std::size_t n = 3 + rng.index(12), m = 2 + rng.index(15), T = 1 + rng.index(4);
        std::vector<std::vector<double>> dv, xv;
        std::vector<Tensor> d, x;
        std::vector<std::vector<Vec3>> targets;
        for (std::size_t t = 0; t < T; ++t) {
            dv.push_back(testing::random_values(3 * n, seed * 100 + t, 0.1));
            xv.push_back(testing::random_values(3 * n, seed * 100 + t + 50));
            d.push_back(param_from(dv.back()));
            x.push_back(param_from(xv.back()));
            targets.push_back(testing::random_cloud(m, seed * 100 + t + 70).points);
        }
        std::vector<double> w = testing::random_values(n, seed + 999);
        for (auto& v : w) v = std::abs(v);
        const double got = filter::loss_adaptive(d, x, targets, w).item();
        CHECK(got == doctest::Approx(naive_loss(dv, xv, targets, w)).epsilon(1e-12));

        const std::vector<std::vector<Vec3>> same(T, targets[0]);
        const double fixed = filter::loss_fixed(d, x, targets[0], w).item();
        CHECK(fixed == doctest::Approx(naive_loss(dv, xv, same, w)).epsilon(1e-12));
    }
}

TEST_CASE("gradients flow through displacements and positions") {
    const std::size_t n = 6;
    Tensor d = param_from(testing::random_values(3 * n, 1, 0.1));
    Tensor x = param_from(testing::random_values(3 * n, 2));
    const std::vector<std::vector<Vec3>> targets{testing::random_cloud(9, 3).points};
    const std::vector<double> w{0.1, 0.2, 0.3, 0.15, 0.05, 0.2};
    auto f = [&] {
        std::vector<Tensor> ds{d}, xs{x};
        return filter::loss_adaptive(ds, xs, targets, w);
    };
    CHECK(testing::max_grad_error(f, {{d, {}}, {x, {}}}) < 1e-6);
}

TEST_CASE("nearest index prefers the lower index on ties") {
    const std::vector<Vec3> y{{1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
    CHECK(filter::nearest_index({0.0, 0.0, 0.0}, y) == 0);
    CHECK(filter::nearest_index({-0.9, 0.0, 0.0}, y) == 1);
}

TEST_CASE("adaptive targets add noise of the requested level") {
    const auto clean_cloud = testing::random_cloud(4000, 21);
    graph::Patch clean;
    clean.coords = clean_cloud.points;
    CHECK(filter::make_adaptive_target(clean, 0.0, 5).coords == clean.coords);

    const double sigma = 0.01;
    const auto noisy = filter::make_adaptive_target(clean, sigma, 5);
    double sum2 = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) sum2 += geo::squared_distance(noisy.coords[i], clean.coords[i]);
    const double std_est = std::sqrt(sum2 / (3.0 * static_cast<double>(clean.size())));
    CHECK(std_est > 0.97 * sigma);
    CHECK(std_est < 1.03 * sigma);
    CHECK(filter::make_adaptive_target(clean, sigma, 5).coords == noisy.coords);
    CHECK(filter::make_adaptive_target(clean, sigma, 6).coords != noisy.coords);
    CHECK_THROWS_AS(filter::make_adaptive_target(clean, -1.0, 5), InvalidInput);
}

TEST_CASE("argument checks") {
    std::vector<Tensor> d{Tensor::constant({2, 3}, std::vector<double>(6, 0.0))};
    std::vector<Tensor> x = d;
    const std::vector<std::vector<Vec3>> targets{{{0.0, 0.0, 0.0}}};
    CHECK_THROWS_AS(filter::loss_adaptive(d, x, targets, std::vector<double>{1.0}), InvalidInput);
    const std::vector<std::vector<Vec3>> two{{{0.0, 0.0, 0.0}}, {{0.0, 0.0, 0.0}}};
    CHECK_THROWS_AS(filter::loss_adaptive(d, x, two, std::vector<double>{0.5, 0.5}), InvalidInput);
    const std::vector<std::vector<Vec3>> empty{{}};
    CHECK_THROWS_AS(filter::loss_adaptive(d, x, empty, std::vector<double>{0.5, 0.5}), InvalidInput);
    CHECK(filter::parse_loss_kind("fixed") == filter::LossKind::Fixed);
    CHECK(filter::to_string(filter::LossKind::Adaptive) == "adaptive");
    CHECK_THROWS_AS(filter::parse_loss_kind("other"), InvalidInput);
}

}
