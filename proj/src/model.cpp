#include "iterfilter/model.hpp"

#include "iterfilter/error.hpp"
#include "iterfilter/rng.hpp"

#include <cmath>

namespace iterfilter::filter {

void ModelConfig::validate() const {
    if (iterations < 1 || iterations > max_iterations)
        throw InvalidInput("iteration count must lie in [1, " + std::to_string(max_iterations) + "]");
    if (k < 1) throw InvalidInput("graph degree k must be positive");
    if (encoder_dims.size() < 2 || encoder_dims.front() != 3) throw InvalidInput("encoder dims must start at 3");
    if (decoder_dims.size() != 5 || decoder_dims.back() != 3)
        throw InvalidInput("decoder dims must describe 4 layers ending in 3 outputs");
    if (decoder_dims.front() != encoder_dims.back())
        throw InvalidInput("decoder input width must equal the final encoder width");
    for (auto d : encoder_dims)
        if (d == 0) throw InvalidInput("encoder dims must be positive");
    for (auto d : decoder_dims)
        if (d == 0) throw InvalidInput("decoder dims must be positive");
    if (!(output_init_scale >= 0.0) || !std::isfinite(output_init_scale))
        throw InvalidInput("output init scale must be finite and non-negative");
}

IterativePFNParams IterativePFNParams::init(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    IterativePFNParams p;
    p.config = config;
    const auto& enc = config.encoder_dims;
    for (std::size_t t = 0; t < config.iterations; ++t) {
        Rng rng = Rng::stream(seed, t);
        IterationModuleParams m;
        for (std::size_t l = 0; l + 1 < enc.size(); ++l) {
            nn::EdgeConvParams ec;
            ec.phi.layers.push_back(nn::make_dense(enc[l], enc[l + 1], nn::Activation::ReLU, rng));
            ec.theta.layers.push_back(nn::make_dense(2 * enc[l], enc[l + 1], nn::Activation::ReLU, rng,
                                                     1.0 / static_cast<double>(config.k)));
            m.encoder.push_back(std::move(ec));
        }
        const auto& dec = config.decoder_dims;
        for (std::size_t l = 0; l + 1 < dec.size(); ++l) {
            const bool last = l + 2 == dec.size();
            m.decoder.layers.push_back(nn::make_dense(dec[l], dec[l + 1], last ? nn::Activation::None : nn::Activation::ReLU,
                                                      rng, last ? config.output_init_scale : 1.0));
        }
        p.modules.push_back(std::move(m));
    }
    return p;
}

IterativePFNParams IterativePFNParams::zeros(const ModelConfig& config) {
    config.validate();
    IterativePFNParams p;
    p.config = config;
    const auto& enc = config.encoder_dims;
    for (std::size_t t = 0; t < config.iterations; ++t) {
        IterationModuleParams m;
        for (std::size_t l = 0; l + 1 < enc.size(); ++l) {
            nn::EdgeConvParams ec;
            ec.phi.layers.push_back(nn::make_dense_zero(enc[l], enc[l + 1], nn::Activation::ReLU));
            ec.theta.layers.push_back(nn::make_dense_zero(2 * enc[l], enc[l + 1], nn::Activation::ReLU));
            m.encoder.push_back(std::move(ec));
        }
        m.decoder = nn::make_mlp_zero(config.decoder_dims, nn::Activation::None);
        p.modules.push_back(std::move(m));
    }
    return p;
}

IterativePFNParams IterativePFNParams::clone() const {
    IterativePFNParams copy = zeros(config);
    const auto src = parameters();
    auto dst = copy.parameters();
    for (std::size_t i = 0; i < src.size(); ++i) std::copy(src[i].data().begin(), src[i].data().end(), dst[i].data().begin());
    return copy;
}

std::vector<std::pair<std::string, nn::Tensor>> IterativePFNParams::named_parameters() const {
    std::vector<std::pair<std::string, nn::Tensor>> out;
    auto add_mlp = [&](const std::string& prefix, const nn::MLPParams& mlp) {
        for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
            out.emplace_back(prefix + std::to_string(l) + ".weight", mlp.layers[l].weight);
            out.emplace_back(prefix + std::to_string(l) + ".bias", mlp.layers[l].bias);
        }
    };
    for (std::size_t t = 0; t < modules.size(); ++t) {
        const std::string mod = "module" + std::to_string(t) + ".";
        for (std::size_t l = 0; l < modules[t].encoder.size(); ++l) {
            const std::string enc = mod + "encoder" + std::to_string(l) + ".";
            add_mlp(enc + "phi", modules[t].encoder[l].phi);
            add_mlp(enc + "theta", modules[t].encoder[l].theta);
        }
        add_mlp(mod + "decoder", modules[t].decoder);
    }
    return out;
}

std::vector<nn::Tensor> IterativePFNParams::parameters() const {
    std::vector<nn::Tensor> out;
    for (auto& [name, t] : named_parameters()) out.push_back(t);
    return out;
}

std::size_t IterativePFNParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : parameters()) n += t.size();
    return n;
}

nn::Tensor positions_tensor(std::span<const geo::Vec3> points, double scale) {
    std::vector<double> data;
    data.reserve(points.size() * 3);
    for (const auto& p : points)
        for (double c : p) data.push_back(c * scale);
    return nn::Tensor::constant({points.size(), 3}, std::move(data));
}

namespace {

std::vector<geo::Vec3> to_points(const nn::Tensor& t) {
    const auto v = t.data();
    std::vector<geo::Vec3> out(t.dim(0));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {v[3 * i], v[3 * i + 1], v[3 * i + 2]};
    return out;
}

} // namespace

nn::Tensor iteration_module_forward(const nn::Tensor& positions, const IterationModuleParams& params, std::size_t k) {
    if (positions.shape().size() != 2 || positions.dim(1) != 3) throw ShapeError("positions must be [n x 3]");
    const auto graph = graph::build_patch_graph(to_points(positions), k);
    nn::Tensor h = positions;
    for (const auto& layer : params.encoder) h = nn::edgeconv_forward(h, graph, layer);
    return nn::decoder_forward(h, params.decoder);
}

ForwardTrace run_modules(const nn::Tensor& initial_positions, const IterativePFNParams& params) {
    ForwardTrace trace;
    nn::Tensor x = initial_positions;
    for (const auto& module : params.modules) {
        nn::Tensor d = iteration_module_forward(x, module, params.config.k);
        trace.inputs.push_back(x);
        trace.displacements.push_back(d);
        x = nn::add(x, d);
    }
    trace.output = x;
    return trace;
}

double patch_scale(const graph::Patch& patch) {
    const double r = patch.radius();
    return r > 0.0 ? r : 1.0;
}

std::vector<geo::Vec3> patch_displacements(const graph::Patch& patch, const IterativePFNParams& params) {
    const std::size_t n = patch.size();
    std::vector<geo::Vec3> out(n, geo::Vec3{0.0, 0.0, 0.0});
    if (n < 2) return out;
    const double r = patch_scale(patch);
    nn::NoGradGuard no_grad;

    std::vector<double> total(3 * n, 0.0);
    nn::Tensor x = positions_tensor(patch.coords, 1.0 / r);
    for (const auto& module : params.modules) {
        nn::Tensor d = iteration_module_forward(x, module, params.config.k);
        const auto dv = d.data();
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += dv[i];
        x = nn::add(x, d);
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = r * geo::Vec3{total[3 * i], total[3 * i + 1], total[3 * i + 2]};
    return out;
}

std::vector<geo::Vec3> filter_patch(const graph::Patch& patch, const IterativePFNParams& params) {
    const auto disp = patch_displacements(patch, params);
    std::vector<geo::Vec3> out(patch.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (patch.reference + patch.coords[i]) + disp[i];
    return out;
}

} // namespace iterfilter::filter
