#pragma once

#include <algorithm>
#include <cmath>

#include "dsr/common.hpp"
#include "dsr/systems.hpp"
#include "dsr/trajectory.hpp"

namespace dsr {

enum class IntegratorMethod { Rk4, Rk45 };

struct IntegratorConfig {
    IntegratorMethod method = IntegratorMethod::Rk4;
    double dt = 0.01;              // fixed-step size (Rk4)
    double rtol = 1e-8;            // adaptive tolerances (Rk45)
    double atol = 1e-10;
    double t_int = 40.0;           // total integration time
    double record_interval = 0.01; // read-out interval
    double divergence_bound = 1e6;

    void check() const {
        require(t_int > 0.0, "integrator: t_int must be positive");
        require(record_interval > 0.0, "integrator: record_interval must be positive");
        if (method == IntegratorMethod::Rk4) {
            require(dt > 0.0, "integrator: dt must be positive");
            const double ratio = record_interval / dt;
            require(std::abs(ratio - std::round(ratio)) < 1e-9,
                    "integrator: record_interval must be an integer multiple of dt");
        } else {
            require(rtol > 0.0 && atol > 0.0, "integrator: tolerances must be positive");
        }
    }

    int record_count() const { return static_cast<int>(std::llround(t_int / record_interval)); }
};

// Anything with n = dim() and dx = vf(x) can be integrated.
template <typename F>
concept FlowField = requires(const F f, const Vec& x) {
    { f.dim() } -> std::convertible_to<int>;
    { f.vf(x) } -> std::convertible_to<Vec>;
};

struct SystemField {
    GroundTruthSystem system;
    int dim() const { return system_dim(system); }
    Vec vf(const Vec& x) const { return eval_vf(system, x); }
    Mat jac(const Vec& x) const { return jacobian_vf(system, x); }
};

namespace detail {

template <typename F>
inline void rk4_step(const F& field, Vec& x, double h, Vec& k1, Vec& k2, Vec& k3, Vec& k4, Vec& tmp) {
    k1 = field.vf(x);
    tmp = x + (0.5 * h) * k1;
    k2 = field.vf(tmp);
    tmp = x + (0.5 * h) * k2;
    k3 = field.vf(tmp);
    tmp = x + h * k3;
    k4 = field.vf(tmp);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Dormand-Prince 5(4) coefficients.
struct Dopri {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
};

// One adaptive segment from t to t_end; returns false when the state leaves
// the divergence bound.
template <typename F>
inline bool dopri_advance(const F& field, Vec& x, double t, double t_end, double rtol, double atol, double bound,
                          double& h) {
    using D = Dopri;
    const int n = static_cast<int>(x.size());
    Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), xt(n), err(n), xnew(n);
    if (h <= 0.0) h = (t_end - t) / 16.0;
    while (t < t_end) {
        h = std::min(h, t_end - t);
        k1 = field.vf(x);
        xt = x + h * (D::a21 * k1);
        k2 = field.vf(xt);
        xt = x + h * (D::a31 * k1 + D::a32 * k2);
        k3 = field.vf(xt);
        xt = x + h * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3);
        k4 = field.vf(xt);
        xt = x + h * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4);
        k5 = field.vf(xt);
        xt = x + h * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 + D::a65 * k5);
        k6 = field.vf(xt);
        xnew = x + h * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 + D::b6 * k6);
        k7 = field.vf(xnew);
        err = h * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 + D::e6 * k6 + D::e7 * k7);

        double err_norm = 0.0;
        for (int i = 0; i < n; ++i) {
            const double sc = atol + rtol * std::max(std::abs(x[i]), std::abs(xnew[i]));
            err_norm += sq(err[i] / sc);
        }
        err_norm = std::sqrt(err_norm / n);

        if (!xnew.allFinite()) {
            h *= 0.25;
            if (h < 1e-14) return false;
            continue;
        }
        if (err_norm <= 1.0) {
            t += h;
            x = xnew;
            if (x.cwiseAbs().maxCoeff() > bound) return false;
        }
        const double factor = err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        if (h < 1e-14) return false;
    }
    return true;
}

}  // namespace detail

// Integrates from x0 and records at multiples of the read-out interval.
// The returned trajectory includes the initial condition at t = 0 and the
// final point at t = t_int. A state exceeding the divergence bound sets the
// divergent flag and truncates the record there (not fatal; metrics treat
// divergent trajectories as maximal error contributions).
template <FlowField F>
inline Trajectory integrate(const F& field, const Vec& x0, const IntegratorConfig& cfg) {
    cfg.check();
    require(x0.allFinite(), "integrate: non-finite initial condition");
    require(x0.size() == field.dim(), "integrate: dimension mismatch");
    const int n_rec = cfg.record_count();
    const int n = field.dim();

    Trajectory traj;
    traj.dt = cfg.record_interval;
    traj.initial_condition = x0;
    traj.times.resize(n_rec + 1);
    traj.states.resize(n_rec + 1, n);

    Vec x = x0;
    traj.times[0] = 0.0;
    traj.states.row(0) = x;
    int recorded = 1;

    if (cfg.method == IntegratorMethod::Rk4) {
        const int sub = static_cast<int>(std::llround(cfg.record_interval / cfg.dt));
        Vec k1(n), k2(n), k3(n), k4(n), tmp(n);
        for (int r = 1; r <= n_rec; ++r) {
            for (int s = 0; s < sub; ++s) detail::rk4_step(field, x, cfg.dt, k1, k2, k3, k4, tmp);
            if (!x.allFinite() || x.cwiseAbs().maxCoeff() > cfg.divergence_bound) {
                traj.divergent = true;
                break;
            }
            traj.times[recorded] = r * cfg.record_interval;
            traj.states.row(recorded) = x;
            ++recorded;
        }
    } else {
        double h = cfg.record_interval;
        for (int r = 1; r <= n_rec; ++r) {
            const bool ok = detail::dopri_advance(field, x, (r - 1) * cfg.record_interval, r * cfg.record_interval,
                                                  cfg.rtol, cfg.atol, cfg.divergence_bound, h);
            if (!ok) {
                traj.divergent = true;
                break;
            }
            traj.times[recorded] = r * cfg.record_interval;
            traj.states.row(recorded) = x;
            ++recorded;
        }
    }
    traj.times.conservativeResize(recorded);
    traj.states.conservativeResize(recorded, n);
    return traj;
}

inline Trajectory integrate(const GroundTruthSystem& sys, const Vec& x0, const IntegratorConfig& cfg) {
    Trajectory traj = integrate(SystemField{sys}, x0, cfg);
    traj.system_id = system_name(sys);
    return traj;
}

}  // namespace dsr
