#pragma once

#include <bit>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "dsr/dataset.hpp"
#include "dsr/models/library_model.hpp"
#include "dsr/models/mlp_ode.hpp"
#include "dsr/models/reservoir.hpp"
#include "dsr/models/shplrnn.hpp"

namespace dsr {

// Model checkpoints: a JSON manifest (family tag, shapes, hyperparameters,
// seed) next to a flat binary of little-endian 64-bit floats, row-major, in
// the order the manifest declares.
namespace checkpoint {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts need byte swaps");

struct ArrayRef {
    std::string name;
    const Mat* matrix = nullptr;
    const Vec* vector = nullptr;
};

namespace detail {

inline void write_arrays(const std::string& bin_path, const std::vector<ArrayRef>& arrays,
                         nlohmann::json& manifest) {
    std::ofstream bin(bin_path, std::ios::binary);
    require(bin.good(), "checkpoint: cannot open " + bin_path);
    manifest["arrays"] = nlohmann::json::array();
    for (const auto& ref : arrays) {
        nlohmann::json entry;
        entry["name"] = ref.name;
        if (ref.matrix) {
            entry["rows"] = ref.matrix->rows();
            entry["cols"] = ref.matrix->cols();
            for (int i = 0; i < ref.matrix->rows(); ++i)
                for (int j = 0; j < ref.matrix->cols(); ++j) {
                    const double v = (*ref.matrix)(i, j);
                    bin.write(reinterpret_cast<const char*>(&v), sizeof(double));
                }
        } else {
            entry["rows"] = ref.vector->size();
            entry["cols"] = 1;
            bin.write(reinterpret_cast<const char*>(ref.vector->data()),
                      static_cast<std::streamsize>(sizeof(double)) * ref.vector->size());
        }
        manifest["arrays"].push_back(entry);
    }
}

class ArrayReader {
  public:
    ArrayReader(const std::string& bin_path, const nlohmann::json& manifest) : in_(bin_path, std::ios::binary) {
        require(in_.good(), "checkpoint: cannot open " + bin_path);
        for (const auto& entry : manifest.at("arrays"))
            declared_.emplace_back(entry.at("name").get<std::string>(),
                                   std::make_pair(entry.at("rows").get<int>(), entry.at("cols").get<int>()));
    }

    Mat next_matrix(const std::string& name) {
        require(cursor_ < declared_.size() && declared_[cursor_].first == name,
                "checkpoint: expected array '" + name + "' at slot " + std::to_string(cursor_));
        const auto [rows, cols] = declared_[cursor_].second;
        ++cursor_;
        Mat m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) {
                double v;
                in_.read(reinterpret_cast<char*>(&v), sizeof(double));
                require(in_.good(), "checkpoint: binary file truncated at '" + name + "'");
                m(i, j) = v;
            }
        return m;
    }

    Vec next_vector(const std::string& name) {
        Mat m = next_matrix(name);
        require(m.cols() == 1, "checkpoint: array '" + name + "' is not a vector");
        return m.col(0);
    }

  private:
    std::ifstream in_;
    std::vector<std::pair<std::string, std::pair<int, int>>> declared_;
    std::size_t cursor_ = 0;
};

inline std::string bin_path_for(const std::string& manifest_path) {
    std::filesystem::path p(manifest_path);
    p.replace_extension(".bin");
    return p.string();
}

inline nlohmann::json stats_json(const StandardizationStats& stats) {
    return {{"mean", stats.mean}, {"std", stats.std_dev}};
}

inline StandardizationStats stats_from(const nlohmann::json& j) {
    StandardizationStats s;
    s.mean = j.at("mean").get<double>();
    s.std_dev = j.at("std").get<double>();
    return s;
}

}  // namespace detail

inline void save_shplrnn(const std::string& manifest_path, const ShPLRNN& model,
                         const StandardizationStats& stats, std::uint64_t seed) {
    nlohmann::json manifest;
    manifest["family"] = "shplrnn";
    manifest["seed"] = seed;
    manifest["standardization"] = detail::stats_json(stats);
    manifest["hyperparameters"] = {{"latent_dim", model.latent_dim()},
                                   {"hidden_dim", model.hidden_dim()},
                                   {"obs_dim", model.obs_dim}};
    const std::string bin = detail::bin_path_for(manifest_path);
    detail::write_arrays(bin, {{"A", nullptr, &model.A}, {"W1", &model.W1, nullptr}, {"W2", &model.W2, nullptr},
                               {"h1", nullptr, &model.h1}, {"h2", nullptr, &model.h2}},
                         manifest);
    manifest["bin"] = std::filesystem::path(bin).filename().string();
    std::ofstream out(manifest_path);
    require(out.good(), "checkpoint: cannot open " + manifest_path);
    out << manifest.dump(2) << "\n";
}

struct LoadedShplrnn {
    ShPLRNN model;
    StandardizationStats stats;
    std::uint64_t seed = 0;
};

inline LoadedShplrnn load_shplrnn(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    require(in.good(), "checkpoint: cannot open " + manifest_path);
    nlohmann::json manifest = nlohmann::json::parse(in);
    require(manifest.at("family") == "shplrnn", "checkpoint: not a shplrnn manifest");
    detail::ArrayReader reader(detail::bin_path_for(manifest_path), manifest);
    LoadedShplrnn loaded;
    const auto& hp = manifest.at("hyperparameters");
    loaded.model = ShPLRNN::zeros(hp.at("latent_dim"), hp.at("hidden_dim"), hp.at("obs_dim"));
    loaded.model.A = reader.next_vector("A");
    loaded.model.W1 = reader.next_matrix("W1");
    loaded.model.W2 = reader.next_matrix("W2");
    loaded.model.h1 = reader.next_vector("h1");
    loaded.model.h2 = reader.next_vector("h2");
    loaded.stats = detail::stats_from(manifest.at("standardization"));
    loaded.seed = manifest.at("seed").get<std::uint64_t>();
    loaded.model.check();
    return loaded;
}

inline void save_reservoir(const std::string& manifest_path, const Reservoir& rc,
                           const StandardizationStats& stats, std::uint64_t seed) {
    nlohmann::json manifest;
    manifest["family"] = "reservoir";
    manifest["seed"] = seed;
    manifest["standardization"] = detail::stats_json(stats);
    const auto& cfg = rc.config();
    manifest["hyperparameters"] = {{"reservoir_dim", rc.reservoir_dim()}, {"obs_dim", rc.obs_dim()},
                                   {"spectral_radius", cfg.spectral_radius}, {"alpha", cfg.alpha},
                                   {"sigma", cfg.sigma},                     {"beta", cfg.beta},
                                   {"ridge", cfg.ridge}};
    const std::string bin = detail::bin_path_for(manifest_path);
    detail::write_arrays(bin,
                         {{"W", &rc.W(), nullptr},
                          {"W_in", &rc.W_in(), nullptr},
                          {"b", nullptr, &rc.bias()},
                          {"W_out", &rc.W_out(), nullptr}},
                         manifest);
    manifest["bin"] = std::filesystem::path(bin).filename().string();
    std::ofstream out(manifest_path);
    require(out.good(), "checkpoint: cannot open " + manifest_path);
    out << manifest.dump(2) << "\n";
}

struct LoadedReservoir {
    Reservoir reservoir;
    StandardizationStats stats;
    std::uint64_t seed = 0;
};

inline LoadedReservoir load_reservoir(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    require(in.good(), "checkpoint: cannot open " + manifest_path);
    nlohmann::json manifest = nlohmann::json::parse(in);
    require(manifest.at("family") == "reservoir", "checkpoint: not a reservoir manifest");
    const auto& hp = manifest.at("hyperparameters");
    ReservoirConfig cfg;
    cfg.reservoir_dim = hp.at("reservoir_dim");
    cfg.obs_dim = hp.at("obs_dim");
    cfg.spectral_radius = hp.at("spectral_radius");
    cfg.alpha = hp.at("alpha");
    cfg.sigma = hp.at("sigma");
    cfg.beta = hp.at("beta");
    cfg.ridge = hp.at("ridge");
    detail::ArrayReader reader(detail::bin_path_for(manifest_path), manifest);
    Mat w = reader.next_matrix("W");
    Mat w_in = reader.next_matrix("W_in");
    Vec b = reader.next_vector("b");
    Mat w_out = reader.next_matrix("W_out");
    LoadedReservoir loaded{Reservoir::from_parts(std::move(w), std::move(w_in), std::move(b), std::move(w_out), cfg),
                           detail::stats_from(manifest.at("standardization")),
                           manifest.at("seed").get<std::uint64_t>()};
    return loaded;
}

inline void save_mlp(const std::string& manifest_path, const MLPOdeField& field, const StandardizationStats& stats,
                     std::uint64_t seed, double dt) {
    nlohmann::json manifest;
    manifest["family"] = "mlp-ode";
    manifest["seed"] = seed;
    manifest["standardization"] = detail::stats_json(stats);
    std::vector<int> hidden;
    for (int l = 0; l + 1 < field.layer_count(); ++l) hidden.push_back(static_cast<int>(field.weights[l].rows()));
    manifest["hyperparameters"] = {{"dim", field.dim()},
                                   {"hidden", hidden},
                                   {"activation", field.activation == Activation::Tanh ? "tanh" : "relu"},
                                   {"dt", dt}};
    std::vector<ArrayRef> arrays;
    for (int l = 0; l < field.layer_count(); ++l) {
        arrays.push_back({"W" + std::to_string(l), &field.weights[l], nullptr});
        arrays.push_back({"b" + std::to_string(l), nullptr, &field.biases[l]});
    }
    const std::string bin = detail::bin_path_for(manifest_path);
    detail::write_arrays(bin, arrays, manifest);
    manifest["bin"] = std::filesystem::path(bin).filename().string();
    std::ofstream out(manifest_path);
    require(out.good(), "checkpoint: cannot open " + manifest_path);
    out << manifest.dump(2) << "\n";
}

struct LoadedMlp {
    MLPOdeField field;
    StandardizationStats stats;
    std::uint64_t seed = 0;
    double dt = 0.01;
};

inline LoadedMlp load_mlp(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    require(in.good(), "checkpoint: cannot open " + manifest_path);
    nlohmann::json manifest = nlohmann::json::parse(in);
    require(manifest.at("family") == "mlp-ode", "checkpoint: not an mlp-ode manifest");
    const auto& hp = manifest.at("hyperparameters");
    LoadedMlp loaded;
    loaded.field = MLPOdeField::zeros(hp.at("dim"), hp.at("hidden").get<std::vector<int>>(),
                                      hp.at("activation") == "tanh" ? Activation::Tanh : Activation::Relu);
    detail::ArrayReader reader(detail::bin_path_for(manifest_path), manifest);
    for (int l = 0; l < loaded.field.layer_count(); ++l) {
        loaded.field.weights[l] = reader.next_matrix("W" + std::to_string(l));
        loaded.field.biases[l] = reader.next_vector("b" + std::to_string(l));
    }
    loaded.stats = detail::stats_from(manifest.at("standardization"));
    loaded.seed = manifest.at("seed").get<std::uint64_t>();
    loaded.dt = hp.at("dt").get<double>();
    loaded.field.check();
    return loaded;
}

inline nlohmann::json library_descriptor_json(const FunctionLibrary& lib) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& f : lib.basis()) {
        nlohmann::json entry;
        switch (f.kind) {
            case BasisFunction::Kind::Monomial:
                entry = {{"monomial", f.exponents}};
                break;
            case BasisFunction::Kind::Sin:
                entry = {{"sin", f.coord}};
                break;
            case BasisFunction::Kind::Cos:
                entry = {{"cos", f.coord}};
                break;
            case BasisFunction::Kind::Custom:
                throw ValidationError("library checkpoint: custom basis functions are not serializable");
        }
        j.push_back(entry);
    }
    return j;
}

inline FunctionLibrary library_from_descriptors(int dim, const nlohmann::json& descriptors) {
    std::vector<BasisFunction> basis;
    for (const auto& entry : descriptors) {
        if (entry.contains("monomial")) {
            basis.push_back(BasisFunction::monomial(entry.at("monomial").get<std::vector<int>>()));
        } else if (entry.contains("sin") || entry.contains("cos")) {
            BasisFunction f;
            f.kind = entry.contains("sin") ? BasisFunction::Kind::Sin : BasisFunction::Kind::Cos;
            f.coord = entry.contains("sin") ? entry.at("sin").get<int>() : entry.at("cos").get<int>();
            const char* vars = "xyzuvw";
            const std::string v = dim <= 6 ? std::string(1, vars[f.coord]) : "x" + std::to_string(f.coord + 1);
            f.label = (entry.contains("sin") ? "sin(" : "cos(") + v + ")";
            basis.push_back(f);
        } else {
            throw ValidationError("library checkpoint: unknown basis descriptor " + entry.dump());
        }
    }
    return FunctionLibrary(dim, std::move(basis));
}

inline void save_library_model(const std::string& manifest_path, const LibraryModel& model, std::uint64_t seed) {
    nlohmann::json manifest;
    manifest["family"] = "library";
    manifest["seed"] = seed;
    manifest["hyperparameters"] = {{"dim", model.dim()}, {"basis", library_descriptor_json(model.library)}};
    const std::string bin = detail::bin_path_for(manifest_path);
    detail::write_arrays(bin, {{"Xi", &model.Xi, nullptr}}, manifest);
    manifest["bin"] = std::filesystem::path(bin).filename().string();
    std::ofstream out(manifest_path);
    require(out.good(), "checkpoint: cannot open " + manifest_path);
    out << manifest.dump(2) << "\n";
}

inline LibraryModel load_library_model(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    require(in.good(), "checkpoint: cannot open " + manifest_path);
    nlohmann::json manifest = nlohmann::json::parse(in);
    require(manifest.at("family") == "library", "checkpoint: not a library manifest");
    const auto& hp = manifest.at("hyperparameters");
    FunctionLibrary lib = library_from_descriptors(hp.at("dim"), hp.at("basis"));
    detail::ArrayReader reader(detail::bin_path_for(manifest_path), manifest);
    LibraryModel model{std::move(lib), reader.next_matrix("Xi")};
    model.check();
    return model;
}

inline std::string family_of(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    require(in.good(), "checkpoint: cannot open " + manifest_path);
    return nlohmann::json::parse(in).at("family").get<std::string>();
}

}  // namespace checkpoint

}  // namespace dsr
