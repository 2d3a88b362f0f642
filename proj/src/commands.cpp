#include "iterfilter/commands.hpp"

#include "iterfilter/checkpoint.hpp"
#include "iterfilter/error.hpp"
#include "iterfilter/io.hpp"
#include "iterfilter/noise.hpp"
#include "iterfilter/rng.hpp"
#include "iterfilter/stitch.hpp"
#include "iterfilter/train.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace iterfilter::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Typed access to one JSON object; every key read is recorded so that
/// finish() can reject the rest.
class Fields {
public:
    Fields(const json& j, std::string context) : j_(j), context_(std::move(context)) {
        if (!j_.is_object()) throw ConfigError(context_ + ": expected a JSON object");
    }

    bool has(const std::string& key) {
        known_.insert(key);
        return j_.contains(key);
    }

    template <class T>
    T get(const std::string& key, T fallback) {
        if (!has(key)) return fallback;
        return convert<T>(key);
    }

    template <class T>
    T require(const std::string& key) {
        if (!has(key)) throw ConfigError(context_ + ": missing required key '" + key + "'");
        return convert<T>(key);
    }

    const json& raw(const std::string& key) {
        known_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (const auto& item : j_.items())
            if (!known_.count(item.key())) throw ConfigError(context_ + ": unknown key '" + item.key() + "'");
    }

private:
    template <class T>
    T convert(const std::string& key) {
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(context_ + "." + key + ": " + e.what());
        }
    }

    const json& j_;
    std::string context_;
    std::set<std::string> known_;
};

std::uint64_t seed_or(const Overrides& o, std::uint64_t config_seed) { return o.seed.value_or(config_seed); }

template <class Fn>
auto as_config_error(Fn&& fn) {
    try {
        return fn();
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
}

filter::ModelConfig parse_model(const json& j) {
    Fields f(j, "model");
    filter::ModelConfig m;
    m.iterations = f.get("iterations", m.iterations);
    m.k = f.get("k", m.k);
    m.encoder_dims = f.get("encoder_dims", m.encoder_dims);
    m.decoder_dims = f.get("decoder_dims", m.decoder_dims);
    m.output_init_scale = f.get("output_init_scale", m.output_init_scale);
    f.finish();
    return m;
}

/// Reads TrainingConfig fields from `f`; the caller finishes `f`.
filter::TrainingConfig parse_training(Fields& f) {
    filter::TrainingConfig c;
    c.epochs = f.get("epochs", c.epochs);
    c.steps_per_epoch = f.get("steps_per_epoch", c.steps_per_epoch);
    c.learning_rate = f.get("learning_rate", c.learning_rate);
    c.batch_size = f.get("batch_size", c.batch_size);
    c.seed = f.get("seed", c.seed);
    c.patch_size = f.get("patch_size", c.patch_size);
    c.target_size = f.get("target_size", c.target_size);
    c.sigma_min = f.get("sigma_min", c.sigma_min);
    c.sigma_max = f.get("sigma_max", c.sigma_max);
    const auto loss = f.get<std::string>("loss", filter::to_string(c.loss));
    c.loss = as_config_error([&] { return filter::parse_loss_kind(loss); });
    if (f.has("model")) c.model = parse_model(f.raw("model"));
    as_config_error([&] {
        c.validate();
        return 0;
    });
    return c;
}

json training_to_json(const filter::TrainingConfig& c) {
    return {{"epochs", c.epochs},
            {"steps_per_epoch", c.steps_per_epoch},
            {"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"seed", c.seed},
            {"patch_size", c.patch_size},
            {"target_size", c.target_size},
            {"sigma_min", c.sigma_min},
            {"sigma_max", c.sigma_max},
            {"loss", filter::to_string(c.loss)},
            {"model", filter::model_config_to_json(c.model)}};
}

noise::NoiseSpec parse_noise(const json& j, const std::string& context) {
    Fields f(j, context);
    noise::NoiseSpec s;
    const auto kind = f.require<std::string>("kind");
    s.kind = as_config_error([&] { return noise::parse_noise_kind(kind); });
    s.scale = f.require<double>("scale");
    s.seed = f.get<std::uint64_t>("seed", 0);
    f.finish();
    if (!(s.scale >= 0.0)) throw ConfigError(context + ": noise scale must be non-negative");
    return s;
}

std::vector<noise::NoiseSpec> parse_noise_list(const json& j, const std::string& context) {
    if (!j.is_array()) throw ConfigError(context + ": expected a list");
    std::vector<noise::NoiseSpec> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_noise(j[i], context + "[" + std::to_string(i) + "]"));
    return out;
}

json noise_to_json(const noise::NoiseSpec& s) {
    return {{"kind", noise::to_string(s.kind)}, {"scale", s.scale}, {"seed", s.seed}};
}

/// Noise applied to dataset entry `entry`: same kind and scale, a seed
/// distinct per entry.
noise::NoiseSpec entry_noise(noise::NoiseSpec spec, std::size_t entry) {
    spec.seed = splitmix64(spec.seed ^ splitmix64(entry));
    return spec;
}

std::string compact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

struct DatasetEntry {
    std::string name;
    std::size_t resolution = 0;
    fs::path cloud;
    fs::path mesh;
};

struct Dataset {
    fs::path manifest;
    std::vector<DatasetEntry> entries;
};

Dataset load_dataset(const fs::path& manifest) {
    const json j = read_json_file(manifest);
    if (!j.is_object() || j.value("format", "") != "iterfilter-dataset" || !j.contains("entries") ||
        !j["entries"].is_array())
        throw InvalidInput(manifest.string() + ": not an iterfilter dataset manifest");
    Dataset d;
    d.manifest = manifest;
    const fs::path base = manifest.parent_path();
    try {
        for (const auto& e : j["entries"]) {
            DatasetEntry entry;
            entry.name = e.at("name").get<std::string>();
            entry.resolution = e.at("resolution").get<std::size_t>();
            entry.cloud = base / e.at("cloud").get<std::string>();
            entry.mesh = base / e.at("mesh").get<std::string>();
            d.entries.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        throw InvalidInput(manifest.string() + ": " + e.what());
    }
    if (d.entries.empty()) throw InvalidInput(manifest.string() + ": manifest lists no clouds");
    return d;
}

std::vector<geo::PointCloud> load_clouds(const Dataset& d) {
    std::vector<geo::PointCloud> clouds;
    for (const auto& e : d.entries) clouds.push_back(io::read_xyz(e.cloud));
    return clouds;
}

stitch::Selection parse_selection_field(Fields& f) {
    const auto name = f.get<std::string>("selection", stitch::to_string(stitch::Selection::GaussianWeight));
    return as_config_error([&] { return stitch::parse_selection(name); });
}

bool same_file(const fs::path& a, const fs::path& b) {
    std::error_code ec;
    if (fs::equivalent(a, b, ec)) return true;
    return fs::weakly_canonical(a, ec) == fs::weakly_canonical(b, ec);
}

} // namespace

std::optional<std::uint64_t> seed_from_environment() {
    const char* value = std::getenv("ITERFILTER_SEED");
    if (!value || !*value) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const unsigned long long seed = std::strtoull(value, &end, 10);
    if (errno != 0 || *end != '\0' || value[0] == '-') throw ConfigError("ITERFILTER_SEED is not an unsigned integer");
    return static_cast<std::uint64_t>(seed);
}

json load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::vector<fs::path> write_builtin_shapes(const fs::path& dir) {
    ensure_dir(dir);
    const std::vector<std::pair<std::string, geo::TriangleMesh>> shapes{
        {"box", geo::make_rounded_box(0.6, 0.15, 8)},
        {"cylinder", geo::make_cylinder(0.5, 1.2, 48, 8)},
        {"icosphere", geo::make_icosphere(3)},
        {"torus", geo::make_torus(0.7, 0.3, 48, 24)},
    };
    std::vector<fs::path> out;
    for (const auto& [name, mesh] : shapes) {
        out.push_back(dir / (name + ".off"));
        io::write_off(out.back(), mesh);
    }
    return out;
}

json cmd_prepare(const json& config, const Overrides& overrides) {
    Fields f(config, "prepare");
    const fs::path mesh_dir = f.require<std::string>("mesh_dir");
    const fs::path out_dir = f.require<std::string>("output_dir");
    const auto resolutions = f.get<std::vector<std::size_t>>("resolutions", {2000});
    const std::uint64_t seed = seed_or(overrides, f.get<std::uint64_t>("seed", 0));
    std::vector<noise::NoiseSpec> noise_specs;
    if (f.has("noise")) noise_specs = parse_noise_list(f.raw("noise"), "prepare.noise");
    f.finish();
    if (resolutions.empty()) throw ConfigError("prepare: resolutions is empty");
    for (auto r : resolutions)
        if (r == 0) throw ConfigError("prepare: resolutions must be positive");

    if (!fs::is_directory(mesh_dir)) throw IoError("mesh directory not found: " + mesh_dir.string());
    std::vector<fs::path> mesh_paths;
    for (const auto& item : fs::directory_iterator(mesh_dir))
        if (item.is_regular_file() && item.path().extension() == ".off") mesh_paths.push_back(item.path());
    std::sort(mesh_paths.begin(), mesh_paths.end());
    if (mesh_paths.empty()) throw InvalidInput("no .off meshes in " + mesh_dir.string());

    std::vector<geo::TriangleMesh> meshes;
    for (const auto& p : mesh_paths) {
        meshes.push_back(io::read_off(p));
        try {
            meshes.back().validate();
        } catch (const InvalidInput& e) {
            throw InvalidInput(p.string() + ": " + e.what());
        }
    }

    // Everything is computed before the first write.
    struct Output {
        fs::path path;
        geo::PointCloud cloud;
        std::optional<geo::TriangleMesh> mesh;
    };
    std::vector<Output> outputs;
    json entries = json::array();
    json noisy = json::array();
    std::size_t entry_index = 0;
    for (std::size_t m = 0; m < meshes.size(); ++m) {
        const std::string stem = mesh_paths[m].stem().string();
        for (std::size_t r = 0; r < resolutions.size(); ++r, ++entry_index) {
            const std::string name = stem + "_" + std::to_string(resolutions[r]);
            const std::uint64_t sample_seed = splitmix64(seed ^ splitmix64(entry_index));
            auto [cloud, transform] = geo::normalize_to_unit_sphere(geo::sample_mesh_uniform(meshes[m], resolutions[r], sample_seed));
            const std::string cloud_rel = "clouds/" + name + ".xyz";
            const std::string mesh_rel = "meshes/" + name + ".off";
            outputs.push_back({out_dir / cloud_rel, cloud, std::nullopt});
            outputs.push_back({out_dir / mesh_rel, {}, transform.apply(meshes[m])});
            entries.push_back({{"name", name},
                               {"shape", stem},
                               {"resolution", resolutions[r]},
                               {"cloud", cloud_rel},
                               {"mesh", mesh_rel},
                               {"source_mesh", mesh_paths[m].filename().string()},
                               {"transform",
                                {{"center", {transform.center[0], transform.center[1], transform.center[2]}},
                                 {"radius", transform.radius}}}});
            for (const auto& spec : noise_specs) {
                const auto applied = entry_noise(spec, entry_index);
                const std::string rel = "noisy/" + name + "_" + noise::to_string(spec.kind) + "_" + compact(spec.scale) + ".xyz";
                outputs.push_back({out_dir / rel, noise::add_noise(cloud, applied), std::nullopt});
                noisy.push_back({{"entry", name}, {"cloud", rel}, {"noise", noise_to_json(applied)}});
            }
        }
    }
    json manifest = {{"format", "iterfilter-dataset"}, {"version", 1}, {"seed", seed}, {"entries", entries}, {"noisy", noisy}};

    ensure_dir(out_dir / "clouds");
    ensure_dir(out_dir / "meshes");
    if (!noise_specs.empty()) ensure_dir(out_dir / "noisy");
    for (const auto& o : outputs) {
        if (o.mesh)
            io::write_off(o.path, *o.mesh);
        else
            io::write_xyz(o.path, o.cloud);
    }
    write_json_file(out_dir / "manifest.json", manifest);
    return manifest;
}

json cmd_train(const json& config, const Overrides& overrides) {
    Fields f(config, "train");
    const fs::path dataset_path = f.require<std::string>("dataset");
    const fs::path out_dir = f.require<std::string>("output_dir");
    const bool resume = f.get("resume", false);
    const bool zero = f.get("debug_zero_checkpoint", false);
    filter::TrainingConfig tc = parse_training(f);
    f.finish();
    tc.seed = seed_or(overrides, tc.seed);

    const fs::path checkpoint = out_dir / "checkpoint.json";
    if (fs::exists(checkpoint) && !resume)
        throw ConfigError(checkpoint.string() + " exists; set \"resume\": true to continue from it");

    json resolved = training_to_json(tc);
    resolved["dataset"] = dataset_path.string();
    resolved["output_dir"] = out_dir.string();
    resolved["resume"] = resume;
    resolved["debug_zero_checkpoint"] = zero;

    const Dataset dataset = load_dataset(dataset_path);
    const auto clouds = load_clouds(dataset);

    std::optional<filter::IterativePFNParams> initial;
    if (resume && fs::exists(checkpoint)) {
        initial = filter::load_checkpoint(checkpoint);
        if (!(initial->config == tc.model)) throw ConfigError("resume: checkpoint model does not match the config model");
    }

    // The checkpoint snapshot leaves out where it was written, so runs into
    // different directories produce identical checkpoint bytes.
    json snapshot = resolved;
    snapshot.erase("output_dir");

    ensure_dir(out_dir);
    json summary = {{"checkpoint", checkpoint.string()}};
    if (zero) {
        filter::save_checkpoint(checkpoint, filter::IterativePFNParams::zeros(tc.model), snapshot);
        filter::TrainingLog{}.write_csv(out_dir / "train_log.csv");
    } else {
        auto result = filter::train(clouds, tc, initial);
        filter::save_checkpoint(checkpoint, result.params, snapshot);
        result.log.write_csv(out_dir / "train_log.csv");
        summary["first_loss"] = result.log.steps.front().loss;
        summary["final_loss"] = result.log.steps.back().loss;
        summary["steps"] = result.log.steps.size();
    }
    write_json_file(out_dir / "resolved_config.json", resolved);
    return summary;
}

json cmd_filter(const json& config, const Overrides& overrides) {
    Fields f(config, "filter");
    const fs::path checkpoint = f.require<std::string>("checkpoint");
    const fs::path input = f.require<std::string>("input");
    const fs::path output = f.require<std::string>("output");
    stitch::StitchConfig sc;
    sc.patch_size = f.get("patch_size", sc.patch_size);
    sc.seed = seed_or(overrides, f.get<std::uint64_t>("seed", 0));
    sc.filter.selection = parse_selection_field(f);
    sc.filter.threads = std::max(1u, overrides.threads);
    std::size_t external = f.get<std::size_t>("external_iterations", 1);
    f.finish();
    if (overrides.external_iterations) external = *overrides.external_iterations;
    if (external == 0) throw ConfigError("filter: external_iterations must be positive");
    if (sc.patch_size < 2) throw ConfigError("filter: patch_size must be at least 2");

    const auto params = filter::load_checkpoint(checkpoint);
    const auto cloud = io::read_xyz(input);
    const auto filtered = stitch::apply_external_iterations(cloud, params, external, sc);
    if (output.has_parent_path()) ensure_dir(output.parent_path());
    io::write_xyz(output, filtered);
    return {{"output", output.string()}, {"points", filtered.size()}, {"external_iterations", external}};
}

json cmd_eval(const json& config, const Overrides& overrides) {
    Fields f(config, "eval");
    const fs::path filtered_path = f.require<std::string>("filtered");
    const fs::path clean_path = f.require<std::string>("clean");
    const fs::path mesh_path = f.require<std::string>("mesh");
    const fs::path report_path = f.require<std::string>("report");
    const auto histogram_path = f.get<std::string>("histogram_csv", "");
    const auto bins = f.get<std::size_t>("bins", 50);
    const auto manifest_path = f.get<std::string>("manifest", "");
    f.finish();
    if (bins == 0) throw ConfigError("eval: bins must be positive");

    const auto filtered = io::read_xyz(filtered_path);
    const auto clean = io::read_xyz(clean_path);
    const auto mesh = io::read_off(mesh_path);
    mesh.validate();

    json metadata = {{"filtered", filtered_path.filename().string()},
                     {"clean", clean_path.filename().string()},
                     {"mesh", mesh_path.filename().string()},
                     {"points", filtered.size()}};
    if (!manifest_path.empty()) {
        const Dataset d = load_dataset(manifest_path);
        const auto it = std::find_if(d.entries.begin(), d.entries.end(), [&](const DatasetEntry& e) {
            return same_file(e.cloud, clean_path) && same_file(e.mesh, mesh_path);
        });
        if (it == d.entries.end())
            throw InvalidInput("clean cloud and mesh are not a matching entry of " + manifest_path);
        if (filtered.size() != it->resolution || clean.size() != it->resolution)
            throw InvalidInput("point count does not match manifest entry " + it->name);
        metadata["entry"] = it->name;
    }

    metrics::EvalReport report;
    const unsigned threads = std::max(1u, overrides.threads);
    report.cd = metrics::chamfer_distance(filtered, clean);
    const auto distances = metrics::point_mesh_distances(filtered, mesh, threads);
    double sq = 0.0;
    for (double d : distances) sq += d * d;
    report.p2m = distances.empty() ? 0.0 : sq / static_cast<double>(distances.size());
    report.histogram = metrics::histogram_of(distances, bins);
    report.metadata = metadata;

    const json j = metrics::to_json(report);
    if (report_path.has_parent_path()) ensure_dir(report_path.parent_path());
    write_json_file(report_path, j);
    if (!histogram_path.empty()) metrics::write_histogram_csv(histogram_path, report.histogram);
    return j;
}

json cmd_ablate(const json& config, const Overrides& overrides) {
    Fields f(config, "ablate");
    const fs::path dataset_path = f.require<std::string>("dataset");
    const fs::path out_dir = f.require<std::string>("output_dir");
    const auto iterations = f.get<std::vector<std::size_t>>("iterations", {1, 2, 4, 8});
    const auto loss_names = f.get<std::vector<std::string>>("losses", {"adaptive", "fixed"});
    std::vector<noise::NoiseSpec> specs{{noise::NoiseKind::IsotropicGaussian, 0.025, 1}};
    if (f.has("noise")) specs = parse_noise_list(f.raw("noise"), "ablate.noise");
    filter::TrainingConfig base;
    if (f.has("training")) {
        Fields t(f.raw("training"), "ablate.training");
        base = parse_training(t);
        t.finish();
    }
    base.seed = seed_or(overrides, base.seed);
    stitch::StitchConfig sc;
    sc.patch_size = f.get("patch_size", base.patch_size);
    sc.seed = base.seed;
    sc.filter.selection = parse_selection_field(f);
    sc.filter.threads = std::max(1u, overrides.threads);
    f.finish();
    if (iterations.empty() || loss_names.empty() || specs.empty()) throw ConfigError("ablate: empty matrix");
    std::vector<filter::LossKind> losses;
    for (const auto& n : loss_names) losses.push_back(as_config_error([&] { return filter::parse_loss_kind(n); }));
    for (auto t : iterations) {
        filter::ModelConfig m = base.model;
        m.iterations = t;
        as_config_error([&] {
            m.validate();
            return 0;
        });
    }

    const Dataset dataset = load_dataset(dataset_path);
    const auto clouds = load_clouds(dataset);
    std::vector<geo::TriangleMesh> meshes;
    for (const auto& e : dataset.entries) meshes.push_back(io::read_off(e.mesh));

    ensure_dir(out_dir);
    std::ostringstream csv;
    csv << "iterations,loss,noise_kind,noise_scale,cd,p2m\n";
    json rows = json::array();
    for (auto t : iterations) {
        for (auto loss : losses) {
            filter::TrainingConfig tc = base;
            tc.model.iterations = t;
            tc.loss = loss;
            const auto result = filter::train(clouds, tc);
            const std::string tag = "T" + std::to_string(t) + "_" + filter::to_string(loss);
            ensure_dir(out_dir / tag);
            filter::save_checkpoint(out_dir / tag / "checkpoint.json", result.params, training_to_json(tc));
            for (const auto& spec : specs) {
                double cd = 0.0, p2m = 0.0;
                for (std::size_t i = 0; i < clouds.size(); ++i) {
                    const auto noisy = noise::add_noise(clouds[i], entry_noise(spec, i));
                    const auto out = stitch::apply_external_iterations(noisy, result.params, 1, sc);
                    cd += metrics::chamfer_distance(out, clouds[i]);
                    p2m += metrics::point_to_mesh(out, meshes[i], sc.filter.threads);
                }
                cd *= metrics::report_scale / static_cast<double>(clouds.size());
                p2m *= metrics::report_scale / static_cast<double>(clouds.size());
                csv << t << ',' << filter::to_string(loss) << ',' << noise::to_string(spec.kind) << ','
                    << io::format_double(spec.scale) << ',' << io::format_double(cd) << ',' << io::format_double(p2m) << '\n';
                rows.push_back({{"iterations", t},
                                {"loss", filter::to_string(loss)},
                                {"noise", noise_to_json(spec)},
                                {"cd", cd},
                                {"p2m", p2m}});
            }
        }
    }
    std::ofstream out(out_dir / "ablation.csv", std::ios::trunc);
    if (!out) throw IoError("cannot write " + (out_dir / "ablation.csv").string());
    out << csv.str();
    return rows;
}

} // namespace iterfilter::cli
