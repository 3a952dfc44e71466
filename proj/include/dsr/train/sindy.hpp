#pragma once

#include <Eigen/SVD>

#include "dsr/models/library_model.hpp"
#include "dsr/trajectory.hpp"

namespace dsr {

// Finite-difference flow estimates: central differences in the interior,
// one-sided stencils at the ends (third order for T >= 4, second order for
// T == 3 where the wider stencil does not fit).
inline Mat estimate_derivatives(const Mat& states, double dt) {
    const int t_len = static_cast<int>(states.rows());
    require(t_len >= 3, "estimate_derivatives: need at least 3 samples");
    require(dt > 0.0, "estimate_derivatives: dt must be positive");
    Mat d(t_len, states.cols());
    for (int t = 1; t + 1 < t_len; ++t) d.row(t) = (states.row(t + 1) - states.row(t - 1)) / (2.0 * dt);
    if (t_len >= 4) {
        d.row(0) =
            (-11.0 * states.row(0) + 18.0 * states.row(1) - 9.0 * states.row(2) + 2.0 * states.row(3)) / (6.0 * dt);
        d.row(t_len - 1) = (11.0 * states.row(t_len - 1) - 18.0 * states.row(t_len - 2) +
                            9.0 * states.row(t_len - 3) - 2.0 * states.row(t_len - 4)) /
                           (6.0 * dt);
    } else {
        d.row(0) = (-3.0 * states.row(0) + 4.0 * states.row(1) - states.row(2)) / (2.0 * dt);
        d.row(2) = (3.0 * states.row(2) - 4.0 * states.row(1) + states.row(0)) / (2.0 * dt);
    }
    return d;
}

inline Mat estimate_derivatives(const Trajectory& traj) {
    require(traj.dt > 0.0, "estimate_derivatives: trajectory without fixed sampling interval");
    return estimate_derivatives(traj.states, traj.dt);
}

struct STLSQConfig {
    double threshold = 0.01;  // coefficient cutoff
    int max_iters = 25;
    double rank_tol = 1e-10;  // relative singular-value cutoff for rank checks
    // What to do when the active feature columns are numerically rank
    // deficient: raise a ConditioningError naming the offending columns, or
    // take the minimum-norm least-squares solution (the latter is what the
    // degenerate algebraic-trajectory experiments need).
    enum class RankPolicy { Error, MinNorm } on_rank_deficient = RankPolicy::Error;
};

namespace detail {

// Columns implicated in the near-null space: dominant components of the right
// singular vectors whose singular values fall below the cutoff.
inline std::vector<std::string> offending_columns(const Eigen::BDCSVD<Mat>& svd, double cutoff,
                                                  const std::vector<int>& active,
                                                  const std::vector<std::string>& names) {
    std::vector<std::string> out;
    const auto& sv = svd.singularValues();
    for (int i = 0; i < sv.size(); ++i) {
        if (sv[i] >= cutoff) continue;
        const Vec v = svd.matrixV().col(i);
        for (int j = 0; j < v.size(); ++j) {
            if (std::abs(v[j]) > 0.3) {
                const std::string& name = names.empty() ? "col" + std::to_string(active[j]) : names[active[j]];
                if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
            }
        }
    }
    return out;
}

}  // namespace detail

// Sequentially thresholded least squares. Iterates a least-squares fit on the
// active columns and hard-thresholds small coefficients until the support is
// a fixed point.
inline Mat stlsq(const Mat& features, const Mat& derivatives, const STLSQConfig& cfg,
                 const std::vector<std::string>& names = {}) {
    require(features.rows() == derivatives.rows(), "stlsq: row count mismatch");
    require(cfg.threshold >= 0.0, "stlsq: threshold must be non-negative");
    const int m = static_cast<int>(features.cols());
    const int n = static_cast<int>(derivatives.cols());
    Mat xi = Mat::Zero(m, n);

    for (int j = 0; j < n; ++j) {
        std::vector<int> active(m);
        for (int i = 0; i < m; ++i) active[i] = i;
        for (int iter = 0; iter < cfg.max_iters && !active.empty(); ++iter) {
            Mat sub(features.rows(), active.size());
            for (std::size_t c = 0; c < active.size(); ++c) sub.col(c) = features.col(active[c]);
            Eigen::BDCSVD<Mat> svd(sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const double sigma_max = svd.singularValues()[0];
            const double cutoff = cfg.rank_tol * sigma_max;
            if (svd.singularValues().minCoeff() < cutoff) {
                if (cfg.on_rank_deficient == STLSQConfig::RankPolicy::Error)
                    throw ConditioningError("stlsq: rank-deficient active set for output dimension " +
                                                std::to_string(j),
                                            detail::offending_columns(svd, cutoff, active, names));
                svd.setThreshold(cfg.rank_tol);
            }
            const Vec coeffs = svd.solve(derivatives.col(j));
            std::vector<int> next;
            next.reserve(active.size());
            for (std::size_t c = 0; c < active.size(); ++c)
                if (std::abs(coeffs[c]) >= cfg.threshold) next.push_back(active[c]);
            xi.col(j).setZero();
            if (next.size() == active.size() || cfg.threshold == 0.0) {
                for (std::size_t c = 0; c < active.size(); ++c)
                    if (cfg.threshold == 0.0 || std::abs(coeffs[c]) >= cfg.threshold)
                        xi(active[c], j) = coeffs[c];
                break;
            }
            // keep the thresholded fit in case the iteration cap is reached
            for (std::size_t c = 0; c < active.size(); ++c)
                if (std::abs(coeffs[c]) >= cfg.threshold) xi(active[c], j) = coeffs[c];
            active = std::move(next);
        }
    }
    return xi;
}

// Full pipeline: finite-difference flow estimates, feature evaluation, STLSQ.
inline LibraryModel fit_sindy(const Trajectory& traj, const FunctionLibrary& lib, const STLSQConfig& cfg = {}) {
    require(traj.dim() == lib.dim(), "fit_sindy: trajectory and library dimensions differ");
    const Mat derivatives = estimate_derivatives(traj);
    const Mat features = library_features(lib, traj.states);
    Mat xi = stlsq(features, derivatives, cfg, lib.names());
    LibraryModel model{lib, std::move(xi)};
    model.check();
    return model;
}

}  // namespace dsr
