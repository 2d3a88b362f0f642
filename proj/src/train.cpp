#include "iterfilter/train.hpp"

#include "iterfilter/adam.hpp"
#include "iterfilter/error.hpp"
#include "iterfilter/kdtree.hpp"
#include "iterfilter/noise.hpp"
#include "iterfilter/schedule.hpp"
#include "iterfilter/stitch.hpp"

#include <chrono>
#include <fstream>

namespace iterfilter::filter {

void TrainingConfig::validate() const {
    model.validate();
    if (epochs == 0 || steps_per_epoch == 0 || batch_size == 0)
        throw InvalidInput("epochs, steps_per_epoch and batch_size must be positive");
    if (!(learning_rate > 0.0)) throw InvalidInput("learning rate must be positive");
    if (patch_size < 2 || target_size < 1) throw InvalidInput("patch sizes must be positive");
    if (!(sigma_min > 0.0) || !(sigma_max >= sigma_min)) throw InvalidInput("need 0 < sigma_min <= sigma_max");
}

void TrainingLog::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "epoch,step,loss,sigma0,wall_ms\n";
    for (const auto& s : steps)
        out << s.epoch << ',' << s.step << ',' << s.loss << ',' << s.sigma0 << ',' << s.wall_ms << '\n';
}

namespace {

struct Sample {
    const geo::PointCloud* clean;
    const geo::KdTree* clean_tree;
};

nn::Tensor patch_loss(const Sample& sample, const TrainingConfig& cfg, const IterativePFNParams& params, Rng& rng,
                      double& sigma0_out) {
    const double sigma0 = rng.uniform(cfg.sigma_min, cfg.sigma_max);
    sigma0_out = sigma0;
    const noise::NoiseSpec spec{noise::NoiseKind::IsotropicGaussian, sigma0, rng.next()};
    const geo::PointCloud noisy = noise::add_noise(*sample.clean, spec);
    const geo::Vec3 ref = noisy[rng.index(noisy.size())];

    const graph::Patch x_patch = graph::extract_patch(geo::KdTree(noisy), ref, cfg.patch_size);
    const graph::Patch y_patch = graph::extract_patch(*sample.clean_tree, ref, cfg.target_size);
    const double r = patch_scale(x_patch);
    const double inv_r = 1.0 / r;
    const auto weights = stitch::stitch_weights(x_patch);

    const std::size_t T = params.iterations();
    std::vector<double> sigmas(T, 0.0);
    if (cfg.loss == LossKind::Adaptive && T >= 2) sigmas = noise_schedule(sigma0, T).sigmas;
    std::vector<std::vector<geo::Vec3>> targets(T);
    for (std::size_t t = 0; t < T; ++t) {
        const std::uint64_t target_seed = rng.next();
        const graph::Patch target = make_adaptive_target(y_patch, sigmas[t], target_seed);
        targets[t].reserve(target.coords.size());
        for (const auto& c : target.coords) targets[t].push_back(inv_r * c);
    }

    const ForwardTrace trace = run_modules(positions_tensor(x_patch.coords, inv_r), params);
    return iterative_nn_loss(trace.displacements, trace.inputs, targets, weights);
}

} // namespace

TrainingResult train(std::span<const geo::PointCloud> dataset, const TrainingConfig& config,
                     std::optional<IterativePFNParams> initial, const StepCallback& on_step) {
    config.validate();
    if (dataset.empty()) throw InvalidInput("training dataset is empty");
    std::vector<geo::KdTree> trees;
    trees.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        geo::require_finite(dataset[i]);
        if (dataset[i].size() < config.target_size || dataset[i].size() < config.patch_size)
            throw InvalidInput("training cloud " + std::to_string(i) + " has " + std::to_string(dataset[i].size()) +
                               " points; at least " + std::to_string(std::max(config.target_size, config.patch_size)) +
                               " required");
        trees.emplace_back(dataset[i]);
    }

    TrainingResult result{initial ? initial->clone() : IterativePFNParams::init(config.model, config.seed), {}};
    if (!(result.params.config == config.model)) throw InvalidInput("initial parameters do not match the model config");
    auto params = result.params.parameters();
    nn::AdamState adam;

    const std::uint64_t step_seed = splitmix64(config.seed ^ 0x747261696eULL);
    std::size_t global = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_total = 0.0;
        for (std::size_t s = 0; s < config.steps_per_epoch; ++s, ++global) {
            const auto start = std::chrono::steady_clock::now();
            Rng rng = Rng::stream(step_seed, global);
            for (auto& p : params) p.zero_grad();

            nn::Tensor total;
            double first_sigma = 0.0;
            for (std::size_t b = 0; b < config.batch_size; ++b) {
                const std::size_t c = rng.index(dataset.size());
                double sigma0 = 0.0;
                nn::Tensor l = patch_loss({&dataset[c], &trees[c]}, config, result.params, rng, sigma0);
                if (b == 0) first_sigma = sigma0;
                total = total.defined() ? nn::add(total, l) : l;
            }
            if (config.batch_size > 1) total = nn::scale(total, 1.0 / static_cast<double>(config.batch_size));
            nn::check_finite(total.data(), "training loss");
            nn::backward(total);
            nn::adam_step(params, adam, config.learning_rate);
            for (const auto& p : params) nn::check_finite(p.data(), "parameters after optimizer step");

            StepRecord rec;
            rec.epoch = epoch;
            rec.step = global;
            rec.loss = total.item();
            rec.sigma0 = first_sigma;
            rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            epoch_total += rec.loss;
            result.log.steps.push_back(rec);
            if (on_step) on_step(rec);
        }
        result.log.epoch_mean_loss.push_back(epoch_total / static_cast<double>(config.steps_per_epoch));
    }
    return result;
}

} // namespace iterfilter::filter
