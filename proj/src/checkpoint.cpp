#include "okan/checkpoint.hpp"

#include <fstream>

#include "okan/errors.hpp"

namespace okan::nn {

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
    nlohmann::json j;
    j["model"] = model.name();
    j["architecture"] = model.describe();
    auto& params = j["parameters"];
    params = nlohmann::json::array();
    for (const auto& p : model.named_parameters()) {
        params.push_back({{"name", p.name},
                          {"shape", p.tensor.shape()},
                          {"data", std::vector<double>(p.tensor.data().begin(), p.tensor.data().end())}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write checkpoint " + path.string());
    out << j.dump(1) << '\n';
}

void load_checkpoint(Model& model, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open checkpoint " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("checkpoint " + path.string() + ": " + e.what());
    }
    if (j.value("model", std::string{}) != model.name())
        throw ParseError("checkpoint is for model '" + j.value("model", std::string{}) + "', expected '" +
                         model.name() + "'");
    auto named = model.named_parameters();
    const auto& params = j.at("parameters");
    if (params.size() != named.size()) throw ParseError("checkpoint: parameter count mismatch");
    for (std::size_t i = 0; i < named.size(); ++i) {
        const auto& entry = params[i];
        if (entry.at("name").get<std::string>() != named[i].name)
            throw ParseError("checkpoint: expected parameter " + named[i].name);
        if (entry.at("shape").get<Shape>() != named[i].tensor.shape())
            throw ParseError("checkpoint: shape mismatch for " + named[i].name);
        const auto values = entry.at("data").get<std::vector<double>>();
        auto dst = named[i].tensor.mutable_data();
        if (values.size() != dst.size()) throw ParseError("checkpoint: size mismatch for " + named[i].name);
        std::copy(values.begin(), values.end(), dst.begin());
    }
}

}  // namespace okan::nn
