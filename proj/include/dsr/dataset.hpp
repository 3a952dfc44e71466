#pragma once

#include <vector>

#include "dsr/integrate.hpp"

namespace dsr {

// Overall scalar mean/std across all trajectories and dimensions.
struct StandardizationStats {
    double mean = 0.0;
    double std_dev = 1.0;

    double standardize(double x) const { return (x - mean) / std_dev; }
    double destandardize(double y) const { return y * std_dev + mean; }
    Mat standardize(const Mat& m) const { return (m.array() - mean) / std_dev; }
    Mat destandardize(const Mat& m) const { return m.array() * std_dev + mean; }
    Vec standardize(const Vec& v) const { return (v.array() - mean) / std_dev; }
    Vec destandardize(const Vec& v) const { return v.array() * std_dev + mean; }
};

struct Dataset {
    std::vector<Trajectory> raw;           // original units, divergent runs excluded
    std::vector<Mat> standardized;         // same order as raw, T x n each
    std::vector<int> excluded;             // indices of divergent initial conditions
    StandardizationStats stats;
    std::string system_id;
    double dt = 0.0;
};

// Integrates every initial condition, drops the t = 0 row (the stacked array
// has shape T x n per trajectory with T = t_int / record_interval), excludes
// divergent runs, and standardizes by the overall mean and standard deviation.
inline Dataset generate_dataset(const GroundTruthSystem& sys, const std::vector<Vec>& ics,
                                const IntegratorConfig& cfg) {
    require(!ics.empty(), "generate_dataset: need at least one initial condition");
    Dataset ds;
    ds.system_id = system_name(sys);
    ds.dt = cfg.record_interval;
    const int n_rec = cfg.record_count();

    for (std::size_t k = 0; k < ics.size(); ++k) {
        Trajectory traj = integrate(sys, ics[k], cfg);
        if (traj.divergent || traj.length() != n_rec + 1) {
            ds.excluded.push_back(static_cast<int>(k));
            continue;
        }
        Trajectory sampled;
        sampled.times = traj.times.tail(n_rec);
        sampled.states = traj.states.bottomRows(n_rec);
        sampled.dt = traj.dt;
        sampled.system_id = traj.system_id;
        sampled.initial_condition = ics[k];
        ds.raw.push_back(std::move(sampled));
    }
    require(!ds.raw.empty(), "generate_dataset: all trajectories diverged");

    double sum = 0.0, sum_sq = 0.0;
    long count = 0;
    for (const auto& traj : ds.raw) {
        sum += traj.states.sum();
        sum_sq += traj.states.array().square().sum();
        count += traj.states.size();
    }
    const double mean = sum / count;
    const double var = sum_sq / count - mean * mean;
    if (var <= 0.0) throw NumericalError("generate_dataset: zero variance, cannot standardize");
    ds.stats.mean = mean;
    ds.stats.std_dev = std::sqrt(var);

    ds.standardized.reserve(ds.raw.size());
    for (const auto& traj : ds.raw) ds.standardized.push_back(ds.stats.standardize(traj.states));
    return ds;
}

}  // namespace dsr
