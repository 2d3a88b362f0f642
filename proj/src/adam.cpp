#include "iterfilter/adam.hpp"

#include "iterfilter/error.hpp"

#include <cmath>

namespace iterfilter::nn {

void adam_step(std::span<Tensor> params, AdamState& state, double learning_rate) {
    if (state.first_moment.empty()) {
        for (const auto& p : params) {
            state.first_moment.emplace_back(p.size(), 0.0);
            state.second_moment.emplace_back(p.size(), 0.0);
        }
    }
    if (state.first_moment.size() != params.size()) throw ShapeError("adam: parameter count changed between steps");

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);

    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& m = state.first_moment[k];
        auto& v = state.second_moment[k];
        auto value = params[k].data();
        if (m.size() != value.size()) throw ShapeError("adam: moment buffer does not match parameter size");
        const auto grad = params[k].grad();
        const bool has_grad = !grad.empty();
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double g = has_grad ? grad[i] : 0.0;
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            value[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

} // namespace iterfilter::nn
