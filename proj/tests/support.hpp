#pragma once

#include "iterfilter/geometry.hpp"
#include "iterfilter/rng.hpp"
#include "iterfilter/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

using iterfilter::Rng;
using iterfilter::geo::PointCloud;
using iterfilter::geo::Vec3;

inline PointCloud random_cloud(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Rng rng(seed);
    PointCloud c;
    for (std::size_t i = 0; i < n; ++i) c.points.push_back({{rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)}});
    return c;
}

/// Points on a coarse integer lattice, so many pairwise distances tie.
inline PointCloud lattice_cloud(std::size_t n, std::uint64_t seed, int extent = 3) {
    Rng rng(seed);
    PointCloud c;
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 p{};
        for (auto& v : p) v = static_cast<double>(static_cast<int>(rng.index(2 * extent + 1)) - extent);
        c.points.push_back(p);
    }
    return c;
}

inline std::vector<double> random_values(std::size_t n, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = scale * rng.uniform(-1.0, 1.0);
    return v;
}

/// Relative error with an absolute floor for near-zero gradients.
inline double relative_error(double a, double b, double floor = 1e-7) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Compares autodiff gradients of `f` with central differences on the
/// selected coordinates of `params` (all coordinates when `coords` is
/// empty for a tensor). Returns the largest relative error.
struct GradCheckTarget {
    iterfilter::nn::Tensor tensor;
    std::vector<std::size_t> coords;
};

inline double max_grad_error(const std::function<iterfilter::nn::Tensor()>& f, std::vector<GradCheckTarget> targets,
                             double h = 1e-5) {
    using iterfilter::nn::Tensor;
    for (auto& t : targets) t.tensor.zero_grad();
    Tensor loss = f();
    iterfilter::nn::backward(loss);
    double worst = 0.0;
    for (auto& t : targets) {
        std::vector<double> analytic(t.tensor.size(), 0.0);
        if (t.tensor.has_grad()) std::copy(t.tensor.grad().begin(), t.tensor.grad().end(), analytic.begin());
        std::vector<std::size_t> coords = t.coords;
        if (coords.empty())
            for (std::size_t i = 0; i < t.tensor.size(); ++i) coords.push_back(i);
        for (std::size_t i : coords) {
            auto data = t.tensor.data();
            const double saved = data[i];
            double plus, minus;
            {
                iterfilter::nn::NoGradGuard guard;
                data[i] = saved + h;
                plus = f().item();
                data[i] = saved - h;
                minus = f().item();
            }
            data[i] = saved;
            worst = std::max(worst, relative_error(analytic[i], (plus - minus) / (2.0 * h)));
        }
    }
    return worst;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("iterfilter_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testing
