#pragma once

#include <map>

#include "dsr/flows.hpp"
#include "dsr/grid.hpp"
#include "dsr/metrics/limit_set.hpp"
#include "dsr/metrics/wasserstein.hpp"
#include "dsr/parallel.hpp"

namespace dsr {

struct EStatConfig {
    int horizon_steps = 4000;  // occupation sample length per initial condition
    SlicedW1Config sw1;
    double unit_scale = 1.0;  // distances are divided by this (set to the data
                              // std to report in standardized units)
    double divergence_penalty = 0.0;  // 0 = use the grid diameter
    int jobs = 1;
};

struct EStatResult {
    double aggregate = 0.0;
    Vec per_point;
    std::vector<bool> divergent;
};

// Statistical error: grid average of the sliced W1 distance between
// occupation samples of the true and reconstructed flows started from the
// same initial conditions. Divergent model runs contribute the penalty value.
// Direction streams are split per grid point, so the result does not depend
// on evaluation order.
inline EStatResult e_stat(const Flow& truth, const Flow& model, const std::vector<Vec>& points, double penalty,
                          const EStatConfig& cfg) {
    require(!points.empty(), "e_stat: empty grid");
    EStatResult res;
    res.per_point.resize(static_cast<int>(points.size()));
    res.divergent.assign(points.size(), false);
    const double scaled_penalty = penalty / cfg.unit_scale;

    parallel_for(static_cast<int>(points.size()), cfg.jobs, [&](int i) {
        Flow::Rollout a = truth.rollout(points[i], cfg.horizon_steps);
        Flow::Rollout b = model.rollout(points[i], cfg.horizon_steps);
        if (a.divergent || b.divergent) {
            res.per_point[i] = scaled_penalty;
            res.divergent[i] = true;
            return;
        }
        SlicedW1Config sw1_cfg = cfg.sw1;
        sw1_cfg.seed = derive_seed(cfg.sw1.seed, static_cast<std::uint64_t>(i));
        res.per_point[i] = sliced_w1(a.points, b.points, sw1_cfg) / cfg.unit_scale;
    });
    res.aggregate = res.per_point.mean();
    return res;
}

inline EStatResult e_stat(const Flow& truth, const Flow& model, const Grid& grid, const EStatConfig& cfg) {
    const double penalty = cfg.divergence_penalty > 0.0 ? cfg.divergence_penalty : grid.diameter();
    return e_stat(truth, model, grid.points(), penalty, cfg);
}

struct TopoConfig {
    double eps_lambda = 0.25;  // relative tolerance on the maximum exponent
    double eps_dh = 0.4;       // Hausdorff tolerance, V / K for the default grid
    int tail_steps = 500;      // limit-set sample length
    double zero_band = 1e-3;   // |lambda| below this counts as sign zero
    LyapunovConfig lyapunov;
    int jobs = 1;
};

struct TopoPointDiag {
    int indicator = 0;
    double lmax_true = 0.0;
    double lmax_model = 0.0;
    double hausdorff_dist = std::numeric_limits<double>::quiet_NaN();
    bool divergent = false;
};

namespace detail {

inline int sign_with_band(double lambda, double band) {
    if (lambda > band) return 1;
    if (lambda < -band) return -1;
    return 0;
}

}  // namespace detail

// Indicator of the three topological-agreement conditions at one initial
// condition: Lyapunov signs agree, the maximum exponents are close in
// relative error (skipped when the true maximum sits in the zero band, where
// the sign test already decides), and the limit sets are Hausdorff-close.
inline TopoPointDiag topo_indicator(const Vec& x0, const Flow& truth, const Flow& model, const TopoConfig& cfg) {
    TopoPointDiag diag;
    bool div_t = false, div_m = false;
    const Vec lam_t = truth.lyapunov(x0, cfg.lyapunov, &div_t);
    const Vec lam_m = model.lyapunov(x0, cfg.lyapunov, &div_m);
    diag.lmax_true = lam_t[lam_t.size() - 1];
    diag.lmax_model = lam_m[lam_m.size() - 1];

    // limit sets from the same run length as the spectra, last tail_steps kept
    const int tail_transient = cfg.lyapunov.transient_steps + cfg.lyapunov.eval_steps - cfg.tail_steps;
    Flow::Rollout tail_t = truth.limit_tail(x0, std::max(0, tail_transient), cfg.tail_steps);
    Flow::Rollout tail_m = model.limit_tail(x0, std::max(0, tail_transient), cfg.tail_steps);
    if (div_t || div_m || tail_t.divergent || tail_m.divergent) {
        diag.divergent = true;
        return diag;
    }
    diag.hausdorff_dist = hausdorff(tail_t.points, tail_m.points);

    require(lam_t.size() == lam_m.size(), "topo_indicator: spectrum length mismatch");
    for (int i = 0; i < lam_t.size(); ++i)
        if (detail::sign_with_band(lam_t[i], cfg.zero_band) != detail::sign_with_band(lam_m[i], cfg.zero_band))
            return diag;
    const double lmax = diag.lmax_true;
    if (std::abs(lmax) >= cfg.zero_band &&
        std::abs(lmax - diag.lmax_model) / std::abs(lmax) >= cfg.eps_lambda)
        return diag;
    if (diag.hausdorff_dist >= cfg.eps_dh) return diag;
    diag.indicator = 1;
    return diag;
}

struct TopoResult {
    double e_top = 0.0;
    std::vector<TopoPointDiag> points;
};

// Topological error: one minus the grid fraction passing all three
// conditions.
inline TopoResult e_top(const Flow& truth, const Flow& model, const std::vector<Vec>& points,
                        const TopoConfig& cfg) {
    require(!points.empty(), "e_top: empty grid");
    TopoResult res;
    res.points.resize(points.size());
    parallel_for(static_cast<int>(points.size()), cfg.jobs,
                 [&](int i) { res.points[i] = topo_indicator(points[i], truth, model, cfg); });
    double pass = 0.0;
    for (const auto& d : res.points) pass += d.indicator;
    res.e_top = 1.0 - pass / static_cast<double>(points.size());
    return res;
}

inline TopoResult e_top(const Flow& truth, const Flow& model, const Grid& grid, TopoConfig cfg) {
    if (cfg.eps_dh <= 0.0) cfg.eps_dh = grid.volume() / grid.size();
    return e_top(truth, model, grid.points(), cfg);
}

}  // namespace dsr
