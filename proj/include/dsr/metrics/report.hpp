#pragma once

#include <fstream>
#include <json.hpp>
#include <map>

#include "dsr/basins.hpp"
#include "dsr/metrics/errors.hpp"

namespace dsr {

// Per-grid-point metric rows plus per-basin and total aggregates.
struct MetricReport {
    std::vector<Vec> points;
    std::vector<int> basin;
    Vec sw1;
    std::vector<TopoPointDiag> topo;
    double e_stat_total = 0.0;
    double e_top_total = 0.0;
    std::map<int, double> e_stat_by_basin;
    std::map<int, double> e_top_by_basin;
    nlohmann::json config_echo;

    double e_stat_on(int basin_id) const {
        const auto it = e_stat_by_basin.find(basin_id);
        require(it != e_stat_by_basin.end(), "metric report: no basin " + std::to_string(basin_id));
        return it->second;
    }

    double e_top_on(int basin_id) const {
        const auto it = e_top_by_basin.find(basin_id);
        require(it != e_top_by_basin.end(), "metric report: no basin " + std::to_string(basin_id));
        return it->second;
    }

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        require(out.good(), "cannot open for writing: " + path);
        const int n = points.empty() ? 0 : static_cast<int>(points[0].size());
        for (int d = 0; d < n; ++d) out << "x" << (d + 1) << ",";
        out << "basin,sw1,indicator,lmax_true,lmax_model,hausdorff\n";
        for (std::size_t i = 0; i < points.size(); ++i) {
            for (int d = 0; d < n; ++d) out << format_full(points[i][d]) << ",";
            out << basin[i] << "," << format_full(sw1[static_cast<int>(i)]) << "," << topo[i].indicator << ","
                << format_full(topo[i].lmax_true) << "," << format_full(topo[i].lmax_model) << ","
                << format_full(topo[i].hausdorff_dist) << "\n";
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["e_stat"] = e_stat_total;
        j["e_top"] = e_top_total;
        nlohmann::json by_basin = nlohmann::json::object();
        for (const auto& [id, v] : e_stat_by_basin) {
            by_basin[std::to_string(id)] = {{"e_stat", v}, {"e_top", e_top_by_basin.at(id)}};
        }
        j["by_basin"] = by_basin;
        int divergent = 0;
        for (const auto& d : topo) divergent += d.divergent ? 1 : 0;
        j["divergent_points"] = divergent;
        j["grid_size"] = points.size();
        j["config"] = config_echo;
        return j;
    }

    void write_json(const std::string& path) const {
        std::ofstream out(path);
        require(out.good(), "cannot open for writing: " + path);
        out << to_json().dump(2) << "\n";
    }
};

// Full metric evaluation of a reconstruction against the ground truth over a
// grid. Basin labels come from the ground-truth system.
inline MetricReport evaluate_model(const Flow& truth, const Flow& model, const Grid& grid,
                                   const std::vector<int>& basins, const EStatConfig& stat_cfg,
                                   TopoConfig topo_cfg) {
    MetricReport report;
    report.points = grid.points();
    require(basins.size() == report.points.size(), "evaluate_model: basin label count mismatch");
    report.basin = basins;

    if (topo_cfg.eps_dh <= 0.0) topo_cfg.eps_dh = grid.volume() / grid.size();
    const double penalty =
        stat_cfg.divergence_penalty > 0.0 ? stat_cfg.divergence_penalty : grid.diameter();

    EStatResult stat = e_stat(truth, model, report.points, penalty, stat_cfg);
    TopoResult topo = e_top(truth, model, report.points, topo_cfg);
    report.sw1 = stat.per_point;
    report.topo = topo.points;
    report.e_stat_total = stat.aggregate;
    report.e_top_total = topo.e_top;

    std::map<int, std::pair<double, int>> stat_acc;
    std::map<int, std::pair<double, int>> top_acc;
    for (std::size_t i = 0; i < report.points.size(); ++i) {
        auto& sa = stat_acc[basins[i]];
        sa.first += stat.per_point[static_cast<int>(i)];
        sa.second += 1;
        auto& ta = top_acc[basins[i]];
        ta.first += topo.points[i].indicator;
        ta.second += 1;
    }
    for (const auto& [id, acc] : stat_acc) report.e_stat_by_basin[id] = acc.first / acc.second;
    for (const auto& [id, acc] : top_acc) report.e_top_by_basin[id] = 1.0 - acc.first / acc.second;

    report.config_echo = {
        {"sw1_directions", stat_cfg.sw1.directions},
        {"sw1_dq", stat_cfg.sw1.dq},
        {"sw1_seed", stat_cfg.sw1.seed},
        {"horizon_steps", stat_cfg.horizon_steps},
        {"unit_scale", stat_cfg.unit_scale},
        {"divergence_penalty", penalty},
        {"eps_lambda", topo_cfg.eps_lambda},
        {"eps_dh", topo_cfg.eps_dh},
        {"tail_steps", topo_cfg.tail_steps},
        {"zero_band", topo_cfg.zero_band},
        {"lyapunov_transient", topo_cfg.lyapunov.transient_steps},
        {"lyapunov_steps", topo_cfg.lyapunov.eval_steps},
        {"lyapunov_reorth_every", topo_cfg.lyapunov.reorth_every},
    };
    return report;
}

}  // namespace dsr
