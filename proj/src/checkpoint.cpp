#include "iterfilter/checkpoint.hpp"

#include "iterfilter/error.hpp"

#include <fstream>

namespace iterfilter::filter {

nlohmann::json model_config_to_json(const ModelConfig& c) {
    return {{"iterations", c.iterations}, {"k", c.k}, {"encoder_dims", c.encoder_dims}, {"decoder_dims", c.decoder_dims},
            {"output_init_scale", c.output_init_scale}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    try {
        c.iterations = j.at("iterations").get<std::size_t>();
        c.k = j.at("k").get<std::size_t>();
        c.encoder_dims = j.at("encoder_dims").get<std::vector<std::size_t>>();
        c.decoder_dims = j.at("decoder_dims").get<std::vector<std::size_t>>();
        c.output_init_scale = j.at("output_init_scale").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("model config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json checkpoint_to_json(const IterativePFNParams& params, const nlohmann::json& config) {
    nlohmann::json j;
    j["format"] = "iterfilter-checkpoint";
    j["version"] = 1;
    j["model"] = model_config_to_json(params.config);
    j["config"] = config;
    auto& list = j["parameters"] = nlohmann::json::array();
    for (const auto& [name, t] : params.named_parameters())
        list.push_back({{"name", name}, {"shape", t.shape()}, {"data", std::vector<double>(t.data().begin(), t.data().end())}});
    return j;
}

IterativePFNParams checkpoint_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", "") != "iterfilter-checkpoint")
        throw InvalidInput("not an iterfilter checkpoint");
    if (j.value("version", 0) != 1) throw InvalidInput("unsupported checkpoint version");
    IterativePFNParams params = IterativePFNParams::zeros(model_config_from_json(j.at("model")));
    auto named = params.named_parameters();
    const auto& list = j.at("parameters");
    if (!list.is_array() || list.size() != named.size())
        throw InvalidInput("checkpoint has " + std::to_string(list.size()) + " parameter blocks, model expects " +
                           std::to_string(named.size()));
    try {
        for (std::size_t i = 0; i < named.size(); ++i) {
            auto& [name, tensor] = named[i];
            const auto& entry = list[i];
            if (entry.at("name").get<std::string>() != name)
                throw InvalidInput("checkpoint block " + std::to_string(i) + " is '" +
                                   entry.at("name").get<std::string>() + "', expected '" + name + "'");
            if (entry.at("shape").get<nn::Shape>() != tensor.shape())
                throw InvalidInput("checkpoint block '" + name + "' has the wrong shape");
            const auto data = entry.at("data").get<std::vector<double>>();
            if (data.size() != tensor.size()) throw InvalidInput("checkpoint block '" + name + "' has the wrong length");
            std::copy(data.begin(), data.end(), tensor.data().begin());
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("malformed checkpoint: ") + e.what());
    }
    return params;
}

void save_checkpoint(const std::filesystem::path& path, const IterativePFNParams& params, const nlohmann::json& config) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    out << checkpoint_to_json(params, config).dump() << '\n';
    if (!out) throw IoError("failed writing checkpoint " + path.string());
}

IterativePFNParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
    }
    return checkpoint_from_json(j);
}

} // namespace iterfilter::filter
