#pragma once

#include <Eigen/Eigenvalues>

#include "dsr/landscape/loss_spec.hpp"

namespace dsr {

struct HessianConfig {
    double fd_step = 1e-4;       // central-difference step on the analytic gradient
    double zero_tol_rel = 1e-6;  // |lambda| < zero_tol_rel * |lambda_max| counts as zero
    int parameter_cap = 2500;    // refuse larger models (O(P^2) cost)
    int jobs = 1;
};

struct HessianReport {
    int positive = 0;
    int zero = 0;
    int negative = 0;
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    double zero_tol = 0.0;
    double symmetry_residual = 0.0;  // max |H - H^T| before symmetrization
    Vec eigenvalues;

    int total() const { return positive + zero + negative; }
};

// Hessian by central finite differences of an analytic gradient,
// symmetrized, with a full eigendecomposition and sign counts.
template <typename GradFn>
HessianReport hessian_eig_counts(const Vec& theta, GradFn&& gradient_at, const HessianConfig& cfg) {
    const int p = static_cast<int>(theta.size());
    require(p <= cfg.parameter_cap,
            "hessian: parameter count " + std::to_string(p) + " above the cap " +
                std::to_string(cfg.parameter_cap));
    Mat hess(p, p);

    parallel_for(p, cfg.jobs, [&](int i) {
        Vec tp = theta, tm = theta;
        tp[i] += cfg.fd_step;
        tm[i] -= cfg.fd_step;
        hess.col(i) = (gradient_at(tp) - gradient_at(tm)) / (2.0 * cfg.fd_step);
    });

    HessianReport report;
    report.symmetry_residual = (hess - hess.transpose()).cwiseAbs().maxCoeff();
    Mat sym = 0.5 * (hess + hess.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
    require(eig.info() == Eigen::Success, "hessian: eigendecomposition failed");
    report.eigenvalues = eig.eigenvalues();
    report.lambda_max = report.eigenvalues[p - 1];
    report.lambda_min = report.eigenvalues[0];
    report.zero_tol = cfg.zero_tol_rel * std::abs(report.lambda_max);
    for (int i = 0; i < p; ++i) {
        const double lambda = report.eigenvalues[i];
        if (lambda > report.zero_tol)
            ++report.positive;
        else if (lambda < -report.zero_tol)
            ++report.negative;
        else
            ++report.zero;
    }
    return report;
}

inline HessianReport hessian_eig_counts(const ShPLRNN& model, const WindowLoss& loss, const HessianConfig& cfg) {
    return hessian_eig_counts(
        model.flatten(),
        [&](const Vec& theta) {
            ShPLRNN local = model;
            local.unflatten(theta);
            return loss.gradient(local);
        },
        cfg);
}

}  // namespace dsr
