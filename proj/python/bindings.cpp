#include "iterfilter/checkpoint.hpp"
#include "iterfilter/commands.hpp"
#include "iterfilter/error.hpp"
#include "iterfilter/geometry.hpp"
#include "iterfilter/io.hpp"
#include "iterfilter/metrics.hpp"
#include "iterfilter/noise.hpp"
#include "iterfilter/schedule.hpp"
#include "iterfilter/stitch.hpp"
#include "iterfilter/train.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace iterfilter;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IndexArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

geo::PointCloud to_cloud(const Array& a) {
    if (a.ndim() != 2 || a.shape(1) != 3) throw InvalidInput("expected an (n, 3) array of points");
    geo::PointCloud c;
    c.points.resize(static_cast<std::size_t>(a.shape(0)));
    auto r = a.unchecked<2>();
    for (py::ssize_t i = 0; i < a.shape(0); ++i) c.points[i] = {{r(i, 0), r(i, 1), r(i, 2)}};
    return c;
}

Array to_array(const geo::PointCloud& c) {
    Array a({static_cast<py::ssize_t>(c.size()), py::ssize_t{3}});
    auto w = a.mutable_unchecked<2>();
    for (std::size_t i = 0; i < c.size(); ++i)
        for (int k = 0; k < 3; ++k) w(i, k) = c.points[i][k];
    return a;
}

geo::TriangleMesh to_mesh(const Array& vertices, const IndexArray& faces) {
    geo::TriangleMesh m;
    m.vertices = to_cloud(vertices).points;
    if (faces.ndim() != 2 || faces.shape(1) != 3) throw InvalidInput("expected an (f, 3) array of faces");
    auto r = faces.unchecked<2>();
    for (py::ssize_t i = 0; i < faces.shape(0); ++i) {
        std::array<std::uint32_t, 3> f{};
        for (int k = 0; k < 3; ++k) {
            if (r(i, k) < 0) throw InvalidInput("negative face index");
            f[k] = static_cast<std::uint32_t>(r(i, k));
        }
        m.faces.push_back(f);
    }
    m.validate();
    return m;
}

py::tuple from_mesh(const geo::TriangleMesh& m) {
    IndexArray faces({static_cast<py::ssize_t>(m.faces.size()), py::ssize_t{3}});
    auto w = faces.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m.faces.size(); ++i)
        for (int k = 0; k < 3; ++k) w(i, k) = m.faces[i][k];
    return py::make_tuple(to_array(geo::PointCloud{m.vertices}), faces);
}

filter::TrainingConfig training_from_dict(const py::dict& d) {
    filter::TrainingConfig c;
    for (auto item : d) {
        const auto key = py::cast<std::string>(item.first);
        const auto value = item.second;
        if (key == "epochs") c.epochs = py::cast<std::size_t>(value);
        else if (key == "steps_per_epoch") c.steps_per_epoch = py::cast<std::size_t>(value);
        else if (key == "learning_rate") c.learning_rate = py::cast<double>(value);
        else if (key == "batch_size") c.batch_size = py::cast<std::size_t>(value);
        else if (key == "seed") c.seed = py::cast<std::uint64_t>(value);
        else if (key == "patch_size") c.patch_size = py::cast<std::size_t>(value);
        else if (key == "target_size") c.target_size = py::cast<std::size_t>(value);
        else if (key == "sigma_min") c.sigma_min = py::cast<double>(value);
        else if (key == "sigma_max") c.sigma_max = py::cast<double>(value);
        else if (key == "loss") c.loss = filter::parse_loss_kind(py::cast<std::string>(value));
        else if (key == "iterations") c.model.iterations = py::cast<std::size_t>(value);
        else if (key == "k") c.model.k = py::cast<std::size_t>(value);
        else if (key == "encoder_dims") c.model.encoder_dims = py::cast<std::vector<std::size_t>>(value);
        else if (key == "decoder_dims") c.model.decoder_dims = py::cast<std::vector<std::size_t>>(value);
        else if (key == "output_init_scale") c.model.output_init_scale = py::cast<double>(value);
        else throw ConfigError("unknown training option '" + key + "'");
    }
    c.validate();
    return c;
}

/// Trained or loaded network weights.
class Model {
public:
    explicit Model(filter::IterativePFNParams params) : params_(std::move(params)) {}

    std::size_t iterations() const { return params_.iterations(); }
    std::size_t parameter_count() const { return params_.parameter_count(); }

    Array filter(const Array& points, std::size_t patch_size, std::uint64_t seed, std::size_t external_iterations,
                 const std::string& selection, unsigned threads) const {
        stitch::StitchConfig sc;
        sc.patch_size = patch_size;
        sc.seed = seed;
        sc.filter.selection = stitch::parse_selection(selection);
        sc.filter.threads = threads;
        const auto cloud = to_cloud(points);
        geo::PointCloud out;
        {
            py::gil_scoped_release release;
            out = stitch::apply_external_iterations(cloud, params_, external_iterations, sc);
        }
        return to_array(out);
    }

    void save(const std::filesystem::path& path) const { filter::save_checkpoint(path, params_); }

    const filter::IterativePFNParams& params() const { return params_; }

private:
    filter::IterativePFNParams params_;
};

} // namespace

PYBIND11_MODULE(_iterfilter, m) {
    m.doc() = "Iterative point cloud filtering (C++ core)";

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<CoverError>(m, "CoverError", PyExc_RuntimeError);

    m.def("make_icosphere", [](int subdivisions) { return from_mesh(geo::make_icosphere(subdivisions)); },
          py::arg("subdivisions") = 3);
    m.def("make_torus", [](double R, double r, int a, int b) { return from_mesh(geo::make_torus(R, r, a, b)); },
          py::arg("major_radius") = 0.7, py::arg("minor_radius") = 0.3, py::arg("major_segments") = 48,
          py::arg("minor_segments") = 24);
    m.def("make_cylinder", [](double r, double h, int s, int hs) { return from_mesh(geo::make_cylinder(r, h, s, hs)); },
          py::arg("radius") = 0.5, py::arg("height") = 1.2, py::arg("segments") = 48, py::arg("height_segments") = 8);
    m.def("make_rounded_box",
          [](double e, double c, int s) { return from_mesh(geo::make_rounded_box(e, c, s)); },
          py::arg("half_extent") = 0.6, py::arg("corner_radius") = 0.15, py::arg("subdivisions") = 8);

    m.def("sample_mesh", [](const Array& v, const IndexArray& f, std::size_t n, std::uint64_t seed) {
        return to_array(geo::sample_mesh_uniform(to_mesh(v, f), n, seed));
    }, py::arg("vertices"), py::arg("faces"), py::arg("n"), py::arg("seed") = 0);

    m.def("normalize_to_unit_sphere", [](const Array& points) {
        auto [cloud, t] = geo::normalize_to_unit_sphere(to_cloud(points));
        return py::make_tuple(to_array(cloud), std::vector<double>(t.center.begin(), t.center.end()), t.radius);
    }, py::arg("points"), "Returns (normalized points, center, radius).");

    m.def("add_noise", [](const Array& points, const std::string& kind, double scale, std::uint64_t seed) {
        return to_array(noise::add_noise(to_cloud(points), {noise::parse_noise_kind(kind), scale, seed}));
    }, py::arg("points"), py::arg("kind") = "isotropic_gaussian", py::arg("scale"), py::arg("seed") = 0);

    m.def("knn", [](const Array& points, const std::vector<double>& query, std::size_t k) {
        if (query.size() != 3) throw InvalidInput("query must have 3 coordinates");
        return geo::knn(geo::Vec3{query[0], query[1], query[2]}, to_cloud(points), k);
    }, py::arg("points"), py::arg("query"), py::arg("k"));

    m.def("farthest_point_sample", [](const Array& points, std::size_t count, std::uint64_t seed) {
        return geo::farthest_point_sample(to_cloud(points), count, seed);
    }, py::arg("points"), py::arg("count"), py::arg("seed") = 0);

    m.def("noise_schedule", [](double sigma0, std::size_t t) { return filter::noise_schedule(sigma0, t).sigmas; },
          py::arg("sigma0"), py::arg("iterations"));

    m.def("stitch_weights", [](const Array& coords) { return stitch::stitch_weights(to_cloud(coords).points); },
          py::arg("coords"), "Gaussian proximity weights of reference-centered patch coordinates.");

    m.def("chamfer_distance", [](const Array& a, const Array& b) {
        return metrics::chamfer_distance(to_cloud(a), to_cloud(b));
    }, py::arg("a"), py::arg("b"));

    m.def("point_to_mesh", [](const Array& points, const Array& v, const IndexArray& f, unsigned threads) {
        return metrics::point_to_mesh(to_cloud(points), to_mesh(v, f), threads);
    }, py::arg("points"), py::arg("vertices"), py::arg("faces"), py::arg("threads") = 1);

    m.def("read_xyz", [](const std::filesystem::path& p) { return to_array(io::read_xyz(p)); }, py::arg("path"));
    m.def("write_xyz", [](const std::filesystem::path& p, const Array& a) { io::write_xyz(p, to_cloud(a)); },
          py::arg("path"), py::arg("points"));

    py::class_<Model>(m, "Model")
        .def_static("init", [](std::size_t iterations, std::uint64_t seed) {
            filter::ModelConfig c;
            c.iterations = iterations;
            return Model(filter::IterativePFNParams::init(c, seed));
        }, py::arg("iterations") = 4, py::arg("seed") = 0)
        .def_static("zeros", [](std::size_t iterations) {
            filter::ModelConfig c;
            c.iterations = iterations;
            return Model(filter::IterativePFNParams::zeros(c));
        }, py::arg("iterations") = 4)
        .def_static("load", [](const std::filesystem::path& p) { return Model(filter::load_checkpoint(p)); },
                    py::arg("path"))
        .def("save", &Model::save, py::arg("path"))
        .def_property_readonly("iterations", &Model::iterations)
        .def_property_readonly("parameter_count", &Model::parameter_count)
        .def("filter", &Model::filter, py::arg("points"), py::arg("patch_size") = 1000, py::arg("seed") = 0,
             py::arg("external_iterations") = 1, py::arg("selection") = "gaussian", py::arg("threads") = 1);

    m.def("train", [](const std::vector<Array>& clouds, const py::dict& options) {
        std::vector<geo::PointCloud> data;
        for (const auto& c : clouds) data.push_back(to_cloud(c));
        const auto config = training_from_dict(options);
        filter::TrainingResult result;
        {
            py::gil_scoped_release release;
            result = filter::train(data, config);
        }
        std::vector<double> losses;
        for (const auto& s : result.log.steps) losses.push_back(s.loss);
        return py::make_tuple(Model(std::move(result.params)), losses);
    }, py::arg("clouds"), py::arg("options") = py::dict(), "Returns (model, per-step losses).");

    m.def("run_command", [](const std::string& name, const std::string& config_json, unsigned threads) {
        cli::Overrides o;
        o.threads = threads;
        o.seed = cli::seed_from_environment();
        const auto config = nlohmann::json::parse(config_json);
        nlohmann::json result;
        if (name == "prepare") result = cli::cmd_prepare(config, o);
        else if (name == "train") result = cli::cmd_train(config, o);
        else if (name == "filter") result = cli::cmd_filter(config, o);
        else if (name == "eval") result = cli::cmd_eval(config, o);
        else if (name == "ablate") result = cli::cmd_ablate(config, o);
        else throw ConfigError("unknown command '" + name + "'");
        return result.dump();
    }, py::arg("name"), py::arg("config_json"), py::arg("threads") = 1,
       "Runs a CLI command with a JSON config string; returns its JSON summary.");
}
