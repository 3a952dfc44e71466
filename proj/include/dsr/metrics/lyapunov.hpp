#pragma once

#include <Eigen/QR>
#include <algorithm>

#include "dsr/common.hpp"

namespace dsr {

struct LyapunovConfig {
    int transient_steps = 3000;  // discarded before accumulation
    int eval_steps = 3000;       // accumulation window
    int reorth_every = 50;       // QR interval
    double divergence_bound = 1e6;

    void check() const {
        require(transient_steps >= 0 && eval_steps >= 1 && reorth_every >= 1,
                "lyapunov: step counts must be positive");
    }
};

namespace detail {

// QR-reorthogonalize the tangent block in place, adding log |R_ii| into the
// accumulators.
inline void qr_accumulate(Mat& tangent, Vec& log_sums) {
    Eigen::HouseholderQR<Mat> qr(tangent);
    const int k = static_cast<int>(tangent.cols());
    Mat r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
    Mat q = qr.householderQ() * Mat::Identity(tangent.rows(), k);
    for (int i = 0; i < k; ++i) {
        const double rii = std::abs(r(i, i));
        log_sums[i] += std::log(std::max(rii, 1e-300));
        if (r(i, i) < 0.0) q.col(i) = -q.col(i);
    }
    tangent = q;
}

}  // namespace detail

// Benettin-style spectrum of a discrete map: the tangent basis is propagated
// through the per-step Jacobians and QR-reorthogonalized periodically; the
// log diagonal of R accumulates the exponents. Returns the k largest
// exponents per unit time, sorted ascending.
//
// step:    z -> z'                        (advances the state)
// tangent: (z, V) -> V in place = J(z) V  (applies the Jacobian at z)
template <typename StepFn, typename TangentFn>
Vec lyapunov_spectrum_map(Vec state, int k, double dt, const LyapunovConfig& cfg, StepFn&& step,
                          TangentFn&& tangent, bool* diverged = nullptr) {
    cfg.check();
    require(k >= 1 && k <= state.size(), "lyapunov: bad exponent count");
    require(dt > 0.0, "lyapunov: dt must be positive");
    if (diverged) *diverged = false;

    for (int t = 0; t < cfg.transient_steps; ++t) {
        state = step(state);
        if (!state.allFinite() || state.cwiseAbs().maxCoeff() > cfg.divergence_bound) {
            if (diverged) *diverged = true;
            return Vec::Zero(k);
        }
    }
    Mat v = Mat::Identity(state.size(), k);
    Vec log_sums = Vec::Zero(k);
    int since_reorth = 0;
    for (int t = 0; t < cfg.eval_steps; ++t) {
        tangent(state, v);
        state = step(state);
        if (!state.allFinite() || state.cwiseAbs().maxCoeff() > cfg.divergence_bound || !v.allFinite()) {
            if (diverged) *diverged = true;
            return Vec::Zero(k);
        }
        if (++since_reorth == cfg.reorth_every) {
            detail::qr_accumulate(v, log_sums);
            since_reorth = 0;
        }
    }
    if (since_reorth > 0) detail::qr_accumulate(v, log_sums);
    Vec exponents = log_sums / (static_cast<double>(cfg.eval_steps) * dt);
    std::sort(exponents.data(), exponents.data() + k);
    return exponents;
}

// Continuous-time spectrum: state and tangent block are integrated jointly by
// RK4 (d/dt V = J(x) V), one step per dt, with the same QR bookkeeping.
//
// field: x -> dx/dt,  jac: x -> J(x)
template <typename FieldFn, typename JacFn>
Vec lyapunov_spectrum_ode(Vec state, int k, double dt, const LyapunovConfig& cfg, FieldFn&& field, JacFn&& jac,
                          bool* diverged = nullptr) {
    cfg.check();
    require(k >= 1 && k <= state.size(), "lyapunov: bad exponent count");
    if (diverged) *diverged = false;
    const int n = static_cast<int>(state.size());

    auto rk4_state = [&](Vec& x) {
        const Vec k1 = field(x);
        const Vec k2 = field(Vec(x + (0.5 * dt) * k1));
        const Vec k3 = field(Vec(x + (0.5 * dt) * k2));
        const Vec k4 = field(Vec(x + dt * k3));
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };
    for (int t = 0; t < cfg.transient_steps; ++t) {
        rk4_state(state);
        if (!state.allFinite() || state.cwiseAbs().maxCoeff() > cfg.divergence_bound) {
            if (diverged) *diverged = true;
            return Vec::Zero(k);
        }
    }

    Mat v = Mat::Identity(n, k);
    Vec log_sums = Vec::Zero(k);
    int since_reorth = 0;
    for (int t = 0; t < cfg.eval_steps; ++t) {
        const Vec k1 = field(state);
        const Mat m1 = jac(state) * v;
        const Vec x2 = state + (0.5 * dt) * k1;
        const Vec k2 = field(x2);
        const Mat m2 = jac(x2) * (v + (0.5 * dt) * m1);
        const Vec x3 = state + (0.5 * dt) * k2;
        const Vec k3 = field(x3);
        const Mat m3 = jac(x3) * (v + (0.5 * dt) * m2);
        const Vec x4 = state + dt * k3;
        const Vec k4 = field(x4);
        const Mat m4 = jac(x4) * (v + dt * m3);
        state += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        v += (dt / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
        if (!state.allFinite() || state.cwiseAbs().maxCoeff() > cfg.divergence_bound || !v.allFinite()) {
            if (diverged) *diverged = true;
            return Vec::Zero(k);
        }
        if (++since_reorth == cfg.reorth_every) {
            detail::qr_accumulate(v, log_sums);
            since_reorth = 0;
        }
    }
    if (since_reorth > 0) detail::qr_accumulate(v, log_sums);
    Vec exponents = log_sums / (static_cast<double>(cfg.eval_steps) * dt);
    std::sort(exponents.data(), exponents.data() + k);
    return exponents;
}

}  // namespace dsr
