#pragma once

#include "dsr/metrics/report.hpp"
#include "dsr/train/bptt.hpp"

namespace dsr {

struct RetrainReport {
    ShPLRNN retrained;
    LossReport loss;
    std::map<int, double> e_stat_before;  // per basin
    std::map<int, double> e_stat_after;

    double fold_change(int basin_id) const {
        const double before = e_stat_before.at(basin_id);
        require(before > 0.0, "retrain report: zero baseline error on basin " + std::to_string(basin_id));
        return e_stat_after.at(basin_id) / before;
    }
};

namespace detail {

inline std::map<int, double> per_basin_mean(const Vec& values, const std::vector<int>& basins) {
    std::map<int, std::pair<double, int>> acc;
    for (std::size_t i = 0; i < basins.size(); ++i) {
        auto& a = acc[basins[i]];
        a.first += values[static_cast<int>(i)];
        a.second += 1;
    }
    std::map<int, double> out;
    for (const auto& [id, a] : acc) out[id] = a.first / a.second;
    return out;
}

}  // namespace detail

// Retrains a generalizing checkpoint on data from a single basin and reports
// the per-basin statistical error before and after; the error surge on the
// held-out basin is the unlearning effect.
inline RetrainReport retrain_unlearning(const ShPLRNN& generalizing, const StandardizationStats& stats,
                                        const Flow& truth, const Grid& grid, const std::vector<int>& basins,
                                        const std::vector<Mat>& single_basin_data, const TrainConfig& cfg,
                                        const EStatConfig& stat_cfg) {
    const auto points = grid.points();
    require(basins.size() == points.size(), "retrain: basin label count mismatch");
    const double penalty = stat_cfg.divergence_penalty > 0.0 ? stat_cfg.divergence_penalty : grid.diameter();

    ShplrnnFlow before_flow(generalizing, stats, truth.time_step());
    EStatResult before = e_stat(truth, before_flow, points, penalty, stat_cfg);

    auto [retrained, loss] = train_shplrnn(generalizing, single_basin_data, cfg);

    ShplrnnFlow after_flow(retrained, stats, truth.time_step());
    EStatResult after = e_stat(truth, after_flow, points, penalty, stat_cfg);

    RetrainReport report;
    report.retrained = std::move(retrained);
    report.loss = std::move(loss);
    report.e_stat_before = detail::per_basin_mean(before.per_point, basins);
    report.e_stat_after = detail::per_basin_mean(after.per_point, basins);
    return report;
}

struct LearnabilityResult {
    std::vector<double> e_stat_values;
    std::vector<double> e_top_values;
    std::vector<int> failed_runs;  // recorded, not silently dropped
    std::vector<std::string> failure_messages;

    Ecdf e_stat_ecdf() const { return ecdf(e_stat_values); }
    Ecdf e_top_ecdf() const { return ecdf(e_top_values); }
};

// Empirical learnability distribution: n independent seeded runs, each
// reporting (E_stat, E_top) on the full evaluation grid.
template <typename RunFn>
LearnabilityResult learnability_ecdf(int n_runs, int jobs, RunFn&& run) {
    require(n_runs >= 1, "learnability: need at least one run");
    std::vector<std::optional<std::pair<double, double>>> results(n_runs);
    std::vector<std::string> errors(n_runs);
    parallel_for(n_runs, jobs, [&](int i) {
        try {
            results[i] = run(i);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    LearnabilityResult out;
    for (int i = 0; i < n_runs; ++i) {
        if (results[i]) {
            out.e_stat_values.push_back(results[i]->first);
            out.e_top_values.push_back(results[i]->second);
        } else {
            out.failed_runs.push_back(i);
            out.failure_messages.push_back(errors[i]);
        }
    }
    return out;
}

}  // namespace dsr
