#include "iterfilter/loss.hpp"

#include "iterfilter/error.hpp"
#include "iterfilter/noise.hpp"

#include <string>

namespace iterfilter::filter {

std::string to_string(LossKind kind) { return kind == LossKind::Adaptive ? "adaptive" : "fixed"; }

LossKind parse_loss_kind(const std::string& name) {
    if (name == "adaptive") return LossKind::Adaptive;
    if (name == "fixed") return LossKind::Fixed;
    throw InvalidInput("unknown loss kind '" + name + "' (expected adaptive or fixed)");
}

graph::Patch make_adaptive_target(const graph::Patch& clean, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw InvalidInput("adaptive target sigma must be non-negative");
    if (sigma == 0.0) return clean;
    graph::Patch out = clean;
    const noise::NoiseSpec spec{noise::NoiseKind::IsotropicGaussian, sigma, seed};
    for (std::size_t i = 0; i < out.coords.size(); ++i) out.coords[i] = out.coords[i] + noise::sample_displacement(spec, i);
    return out;
}

std::uint32_t nearest_index(const geo::Vec3& query, std::span<const geo::Vec3> targets) {
    std::uint32_t best = 0;
    double best_d2 = geo::squared_distance(query, targets[0]);
    for (std::size_t j = 1; j < targets.size(); ++j) {
        const double d2 = geo::squared_distance(query, targets[j]);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = static_cast<std::uint32_t>(j);
        }
    }
    return best;
}

nn::Tensor iterative_nn_loss(std::span<const nn::Tensor> displacements, std::span<const nn::Tensor> inputs,
                             std::span<const std::vector<geo::Vec3>> targets, std::span<const double> weights) {
    const std::size_t T = displacements.size();
    if (T == 0) throw InvalidInput("loss needs at least one iteration");
    if (inputs.size() != T || targets.size() != T)
        throw InvalidInput("loss: " + std::to_string(T) + " displacement sets but " + std::to_string(inputs.size()) +
                           " inputs and " + std::to_string(targets.size()) + " targets");
    const std::size_t n = displacements[0].dim(0);
    if (weights.size() != n) throw InvalidInput("loss: one weight per point required");
    const nn::Tensor w = nn::Tensor::constant({n}, std::vector<double>(weights.begin(), weights.end()));

    nn::Tensor total;
    for (std::size_t t = 0; t < T; ++t) {
        if (targets[t].empty()) throw InvalidInput("loss: empty target patch");
        const auto& x = inputs[t];
        if (x.shape() != displacements[t].shape() || x.dim(0) != n) throw ShapeError("loss: position/displacement shapes differ");
        const auto xv = x.data();
        std::vector<double> nn_points(3 * n);
        for (std::size_t i = 0; i < n; ++i) {
            const geo::Vec3 q{xv[3 * i], xv[3 * i + 1], xv[3 * i + 2]};
            const auto& y = targets[t][nearest_index(q, targets[t])];
            for (int a = 0; a < 3; ++a) nn_points[3 * i + a] = y[a];
        }
        const nn::Tensor target_disp = nn::sub(nn::Tensor::constant({n, 3}, std::move(nn_points)), x);
        const nn::Tensor diff = nn::sub(displacements[t], target_disp);
        const nn::Tensor term = nn::sum(nn::mul(nn::row_sum(nn::mul(diff, diff)), w));
        total = total.defined() ? nn::add(total, term) : term;
    }
    return total;
}

nn::Tensor loss_adaptive(std::span<const nn::Tensor> displacements, std::span<const nn::Tensor> inputs,
                         std::span<const std::vector<geo::Vec3>> targets, std::span<const double> weights) {
    return iterative_nn_loss(displacements, inputs, targets, weights);
}

nn::Tensor loss_fixed(std::span<const nn::Tensor> displacements, std::span<const nn::Tensor> inputs,
                      std::span<const geo::Vec3> clean, std::span<const double> weights) {
    const std::vector<std::vector<geo::Vec3>> targets(displacements.size(),
                                                      std::vector<geo::Vec3>(clean.begin(), clean.end()));
    return iterative_nn_loss(displacements, inputs, targets, weights);
}

} // namespace iterfilter::filter
