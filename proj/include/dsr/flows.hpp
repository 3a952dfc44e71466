#pragma once

#include <memory>

#include "dsr/dataset.hpp"
#include "dsr/integrate.hpp"
#include "dsr/metrics/lyapunov.hpp"
#include "dsr/models/library_model.hpp"
#include "dsr/models/mlp_ode.hpp"
#include "dsr/models/reservoir.hpp"
#include "dsr/models/shplrnn.hpp"

namespace dsr {

// Uniform view of a flow (ground truth or reconstruction) for metric
// evaluation: observation-space rollouts in original units at a fixed
// sampling interval, plus the leading Lyapunov exponents per unit time.
class Flow {
  public:
    struct Rollout {
        Mat points;  // rows at t = dt, 2dt, ..., steps*dt
        bool divergent = false;
    };

    virtual ~Flow() = default;
    virtual int dim() const = 0;
    virtual double time_step() const = 0;
    virtual Rollout rollout(const Vec& x0, int steps) const = 0;
    virtual Vec lyapunov(const Vec& x0, const LyapunovConfig& cfg, bool* diverged = nullptr) const = 0;

    // Post-transient tail approximating the omega-limit set of x0.
    Rollout limit_tail(const Vec& x0, int transient_steps, int tail_steps) const {
        Rollout r = rollout(x0, transient_steps + tail_steps);
        if (r.divergent || r.points.rows() < transient_steps + tail_steps) {
            r.divergent = true;
            r.points.resize(0, dim());
            return r;
        }
        r.points = r.points.bottomRows(tail_steps).eval();
        return r;
    }
};

// Ground-truth system integrated with fixed-step RK4 at the read-out
// interval.
class SystemFlow : public Flow {
  public:
    SystemFlow(GroundTruthSystem sys, double dt, double divergence_bound = 1e6)
        : sys_(std::move(sys)), dt_(dt), bound_(divergence_bound) {}

    int dim() const override { return system_dim(sys_); }
    double time_step() const override { return dt_; }

    Rollout rollout(const Vec& x0, int steps) const override {
        IntegratorConfig cfg;
        cfg.method = IntegratorMethod::Rk4;
        cfg.dt = dt_;
        cfg.record_interval = dt_;
        cfg.t_int = steps * dt_;
        cfg.divergence_bound = bound_;
        Trajectory traj = integrate(sys_, x0, cfg);
        Rollout r;
        r.divergent = traj.divergent;
        r.points = traj.states.bottomRows(traj.length() - 1).eval();
        return r;
    }

    Vec lyapunov(const Vec& x0, const LyapunovConfig& cfg, bool* diverged = nullptr) const override {
        return lyapunov_spectrum_ode(
            x0, dim(), dt_, cfg, [&](const Vec& x) { return eval_vf(sys_, x); },
            [&](const Vec& x) { return jacobian_vf(sys_, x); }, diverged);
    }

    const GroundTruthSystem& system() const { return sys_; }

  private:
    GroundTruthSystem sys_;
    double dt_;
    double bound_;
};

// Library-regression model treated as a continuous vector field in original
// units.
class LibraryFlow : public Flow {
  public:
    LibraryFlow(LibraryModel model, double dt, double divergence_bound = 1e6)
        : model_(std::move(model)), dt_(dt), bound_(divergence_bound) {
        model_.check();
    }

    int dim() const override { return model_.dim(); }
    double time_step() const override { return dt_; }

    Rollout rollout(const Vec& x0, int steps) const override {
        IntegratorConfig cfg;
        cfg.method = IntegratorMethod::Rk4;
        cfg.dt = dt_;
        cfg.record_interval = dt_;
        cfg.t_int = steps * dt_;
        cfg.divergence_bound = bound_;
        Trajectory traj = integrate(model_, x0, cfg);
        Rollout r;
        r.divergent = traj.divergent;
        r.points = traj.states.bottomRows(traj.length() - 1).eval();
        return r;
    }

    Vec lyapunov(const Vec& x0, const LyapunovConfig& cfg, bool* diverged = nullptr) const override {
        return lyapunov_spectrum_ode(
            x0, dim(), dt_, cfg, [&](const Vec& x) { return model_.vf(x); },
            [&](const Vec& x) { return model_.jac(x); }, diverged);
    }

    const LibraryModel& model() const { return model_; }

  private:
    LibraryModel model_;
    double dt_;
    double bound_;
};

// shPLRNN in standardized coordinates behind a destandardizing readout. The
// latent state is seeded from the observation (free coordinates zero); the
// exponents are those of the latent map, reported per unit time.
class ShplrnnFlow : public Flow {
  public:
    ShplrnnFlow(ShPLRNN model, StandardizationStats stats, double dt)
        : model_(std::move(model)), stats_(stats), dt_(dt) {
        model_.check();
    }

    int dim() const override { return model_.obs_dim; }
    double time_step() const override { return dt_; }

    Rollout rollout(const Vec& x0, int steps) const override {
        Rollout r;
        r.points.resize(steps, dim());
        Vec z = model_.latent_from_observation(stats_.standardize(x0));
        for (int t = 0; t < steps; ++t) {
            z = model_.step(z);
            r.points.row(t) = stats_.destandardize(Vec(z.head(dim())));
        }
        return r;  // the clipped map is globally bounded; no divergence
    }

    Vec lyapunov(const Vec& x0, const LyapunovConfig& cfg, bool* diverged = nullptr) const override {
        Vec z0 = model_.latent_from_observation(stats_.standardize(x0));
        return lyapunov_spectrum_map(
            z0, dim(), dt_, cfg, [&](const Vec& z) { return model_.step(z); },
            [&](const Vec& z, Mat& v) { v = model_.jacobian(z) * v; }, diverged);
    }

    const ShPLRNN& model() const { return model_; }
    const StandardizationStats& stats() const { return stats_; }

  private:
    ShPLRNN model_;
    StandardizationStats stats_;
    double dt_;
};

// Echo state network driven closed-loop from a single warm-up observation.
// The first few closed-loop outputs carry the zero-state transient and are
// excluded from the metric sample.
class RcFlow : public Flow {
  public:
    RcFlow(Reservoir rc, StandardizationStats stats, double dt, int drop_first = 10)
        : rc_(std::move(rc)), stats_(stats), dt_(dt), drop_(drop_first) {}

    int dim() const override { return rc_.obs_dim(); }
    double time_step() const override { return dt_; }

    Rollout rollout(const Vec& x0, int steps) const override {
        Mat warm(1, dim());
        warm.row(0) = stats_.standardize(x0);
        bool diverged = false;
        Mat out = rc_.rollout(warm, steps + drop_, &diverged);
        Rollout r;
        r.divergent = diverged || out.rows() < steps + drop_;
        const Mat kept = r.divergent && out.rows() < steps + drop_ ? out : Mat(out.bottomRows(steps));
        r.points = stats_.destandardize(kept);
        return r;
    }

    Vec lyapunov(const Vec& x0, const LyapunovConfig& cfg, bool* diverged = nullptr) const override {
        Mat warm(1, dim());
        warm.row(0) = stats_.standardize(x0);
        Vec r0 = rc_.closed_loop_state(warm);
        return lyapunov_spectrum_map(
            r0, dim(), dt_, cfg, [&](const Vec& r) { return rc_.closed_loop_step(r); },
            [&](const Vec& r, Mat& v) { rc_.closed_loop_tangent(r, v); }, diverged);
    }

    const Reservoir& reservoir() const { return rc_; }

  private:
    Reservoir rc_;
    StandardizationStats stats_;
    double dt_;
    int drop_;
};

// MLP ODE field learned in standardized coordinates, integrated with RK4 at
// the data sampling interval.
class NodeFlow : public Flow {
  public:
    NodeFlow(MLPOdeField field, StandardizationStats stats, double dt, double divergence_bound = 1e6)
        : field_(std::move(field)), stats_(stats), dt_(dt), bound_(divergence_bound) {
        field_.check();
    }

    int dim() const override { return field_.dim(); }
    double time_step() const override { return dt_; }

    Rollout rollout(const Vec& x0, int steps) const override {
        IntegratorConfig cfg;
        cfg.method = IntegratorMethod::Rk4;
        cfg.dt = dt_;
        cfg.record_interval = dt_;
        cfg.t_int = steps * dt_;
        cfg.divergence_bound = bound_;
        Trajectory traj = integrate(field_, stats_.standardize(x0), cfg);
        Rollout r;
        r.divergent = traj.divergent;
        const Mat tail_rows = traj.states.bottomRows(traj.length() - 1);
        r.points = stats_.destandardize(tail_rows);
        return r;
    }

    Vec lyapunov(const Vec& x0, const LyapunovConfig& cfg, bool* diverged = nullptr) const override {
        return lyapunov_spectrum_ode(
            stats_.standardize(x0), dim(), dt_, cfg, [&](const Vec& x) { return field_.vf(x); },
            [&](const Vec& x) { return field_.jac(x); }, diverged);
    }

    const MLPOdeField& field() const { return field_; }

  private:
    MLPOdeField field_;
    StandardizationStats stats_;
    double dt_;
    double bound_;
};

inline Flow::Rollout limit_set(const Flow& flow, const Vec& x0, int transient_steps, int tail_steps) {
    return flow.limit_tail(x0, transient_steps, tail_steps);
}

}  // namespace dsr
