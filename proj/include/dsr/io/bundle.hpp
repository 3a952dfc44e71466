#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "dsr/dataset.hpp"
#include "dsr/metrics/limit_set.hpp"
#include "dsr/train/optimizer.hpp"

namespace dsr {

// Dataset bundle: one trajectory CSV per initial condition plus a JSON
// sidecar carrying the standardization stats, system id, seed, and the
// integrator configuration that produced the data.
inline void write_dataset_bundle(const std::string& dir, const Dataset& ds, std::uint64_t seed,
                                 const IntegratorConfig& cfg) {
    std::filesystem::create_directories(dir);
    nlohmann::json sidecar;
    sidecar["system"] = ds.system_id;
    sidecar["seed"] = seed;
    sidecar["standardization"] = {{"mean", ds.stats.mean}, {"std", ds.stats.std_dev}};
    sidecar["integrator"] = {{"method", cfg.method == IntegratorMethod::Rk4 ? "rk4" : "rk45"},
                             {"dt", cfg.dt},
                             {"rtol", cfg.rtol},
                             {"atol", cfg.atol},
                             {"t_int", cfg.t_int},
                             {"record_interval", cfg.record_interval},
                             {"divergence_bound", cfg.divergence_bound}};
    sidecar["excluded_divergent"] = ds.excluded;
    sidecar["trajectories"] = nlohmann::json::array();
    for (std::size_t k = 0; k < ds.raw.size(); ++k) {
        const std::string name = "trajectory_" + std::to_string(k) + ".csv";
        write_trajectory_csv(ds.raw[k], (std::filesystem::path(dir) / name).string());
        nlohmann::json entry;
        entry["file"] = name;
        entry["initial_condition"] = std::vector<double>(
            ds.raw[k].initial_condition.data(),
            ds.raw[k].initial_condition.data() + ds.raw[k].initial_condition.size());
        sidecar["trajectories"].push_back(entry);
    }
    std::ofstream out(std::filesystem::path(dir) / "dataset.json");
    require(out.good(), "bundle: cannot write sidecar in " + dir);
    out << sidecar.dump(2) << "\n";
}

struct LoadedBundle {
    std::vector<Trajectory> raw;
    std::vector<Mat> standardized;
    StandardizationStats stats;
    std::string system_id;
    double dt = 0.0;
};

inline LoadedBundle read_dataset_bundle(const std::string& dir) {
    const std::string sidecar_path = (std::filesystem::path(dir) / "dataset.json").string();
    std::ifstream in(sidecar_path);
    require(in.good(), "bundle: cannot open " + sidecar_path);
    nlohmann::json sidecar = nlohmann::json::parse(in);
    LoadedBundle bundle;
    bundle.system_id = sidecar.at("system").get<std::string>();
    bundle.stats.mean = sidecar.at("standardization").at("mean").get<double>();
    bundle.stats.std_dev = sidecar.at("standardization").at("std").get<double>();
    for (const auto& entry : sidecar.at("trajectories")) {
        const std::string path = (std::filesystem::path(dir) / entry.at("file").get<std::string>()).string();
        bundle.raw.push_back(read_trajectory_csv(path));
        bundle.standardized.push_back(bundle.stats.standardize(bundle.raw.back().states));
    }
    require(!bundle.raw.empty(), "bundle: no trajectories listed in " + sidecar_path);
    bundle.dt = bundle.raw.front().dt;
    return bundle;
}

// Loss curves: CSV `step,loss,lr`.
inline void write_loss_csv(const LossReport& report, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), "cannot open for writing: " + path);
    out << "step,loss,lr\n";
    for (std::size_t i = 0; i < report.loss.size(); ++i)
        out << static_cast<long long>(report.steps[i]) << "," << format_full(report.loss[i]) << ","
            << format_full(report.lr[i]) << "\n";
}

// eCDF tables: CSV `value,fraction`.
inline void write_ecdf_csv(const Ecdf& e, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), "cannot open for writing: " + path);
    out << "value,fraction\n";
    for (std::size_t i = 0; i < e.values.size(); ++i)
        out << format_full(e.values[i]) << "," << format_full(e.fractions[i]) << "\n";
}

}  // namespace dsr
