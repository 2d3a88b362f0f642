#include "iterfilter/commands.hpp"
#include "iterfilter/error.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

enum ExitCode { ok = 0, failure = 1, config_error = 2, data_error = 3 };

} // namespace

int main(int argc, char** argv) {
    using namespace iterfilter;

    CLI::App app{"Iterative point cloud filtering: prepare data, train, filter, evaluate"};
    app.require_subcommand(1);

    std::string config_path;
    unsigned threads = 1;
    std::size_t external_iters = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--threads", threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
    };
    auto* prepare = app.add_subcommand("prepare", "Sample, normalize and optionally corrupt meshes");
    auto* train = app.add_subcommand("train", "Train an IterativePFN model");
    auto* filt = app.add_subcommand("filter", "Filter a point cloud with a checkpoint");
    auto* eval = app.add_subcommand("eval", "Compute CD, P2M and a distance histogram");
    auto* ablate = app.add_subcommand("ablate", "Iteration-count and loss ablation matrix");
    for (auto* cmd : {prepare, train, filt, eval, ablate}) add_common(cmd);
    filt->add_option("--external-iters", external_iters, "Full passes over the cloud (overrides config)")
        ->check(CLI::PositiveNumber);

    std::string shapes_dir;
    auto* shapes = app.add_subcommand("shapes", "Write the built-in analytic meshes as OFF files");
    shapes->add_option("--output", shapes_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (shapes->parsed()) {
            for (const auto& p : cli::write_builtin_shapes(shapes_dir)) std::cout << p.string() << '\n';
            return ok;
        }
        cli::Overrides overrides;
        overrides.threads = threads;
        overrides.seed = cli::seed_from_environment();
        if (external_iters > 0) overrides.external_iterations = external_iters;
        const auto config = cli::load_config(config_path);

        nlohmann::json result;
        if (prepare->parsed())
            result = cli::cmd_prepare(config, overrides);
        else if (train->parsed())
            result = cli::cmd_train(config, overrides);
        else if (filt->parsed())
            result = cli::cmd_filter(config, overrides);
        else if (eval->parsed())
            result = cli::cmd_eval(config, overrides);
        else
            result = cli::cmd_ablate(config, overrides);
        std::cout << result.dump(2) << '\n';
        return ok;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const IoError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const InvalidInput& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const ShapeError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
}
