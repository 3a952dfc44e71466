#pragma once

#include <Eigen/Eigenvalues>

#include "dsr/common.hpp"
#include "dsr/rng.hpp"

namespace dsr {

struct ReservoirConfig {
    int reservoir_dim = 300;
    int obs_dim = 2;
    double spectral_radius = 1.0;  // rho
    double alpha = 0.7;            // leakage
    double sigma = 0.2;            // input weight std
    double beta = 0.5;             // bias std
    double ridge = 1e-8;           // ridge = 0 restores the plain pseudo-inverse
};

inline double spectral_radius_of(const Mat& m) {
    Eigen::EigenSolver<Mat> solver(m, /*computeEigenvectors=*/false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

// Echo state network
//   r_t = alpha r_{t-1} + (1 - alpha) tanh(W r_{t-1} + W_in u_t + b)
//   x_t = W_out r_t
// Only W_out is learned; the dynamical reservoir is fixed after construction.
class Reservoir {
  public:
    Reservoir() = default;

    // W fully connected with standard normal entries rescaled to the target
    // spectral radius; W_in and b Gaussian with std sigma and beta.
    Reservoir(const ReservoirConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
        Rng rng(derive_seed(seed, "reservoir"));
        W_ = rng.normal_mat(cfg.reservoir_dim, cfg.reservoir_dim);
        const double rad = spectral_radius_of(W_);
        require(rad > 0.0, "reservoir: zero spectral radius draw");
        W_ *= cfg.spectral_radius / rad;
        W_in_ = cfg.sigma * rng.normal_mat(cfg.reservoir_dim, cfg.obs_dim);
        b_ = cfg.beta * rng.normal_vec(cfg.reservoir_dim);
        W_out_ = Mat::Zero(cfg.obs_dim, cfg.reservoir_dim);
    }

    // Rebuilds a reservoir from explicit matrices (checkpoint loading, pinned
    // test fixtures). No rescaling is applied.
    static Reservoir from_parts(Mat w, Mat w_in, Vec b, Mat w_out, const ReservoirConfig& cfg) {
        Reservoir rc;
        rc.cfg_ = cfg;
        rc.W_ = std::move(w);
        rc.W_in_ = std::move(w_in);
        rc.b_ = std::move(b);
        rc.W_out_ = std::move(w_out);
        require(rc.W_.rows() == rc.W_.cols(), "reservoir: W must be square");
        require(rc.W_in_.rows() == rc.W_.rows() && rc.b_.size() == rc.W_.rows(), "reservoir: shape mismatch");
        require(rc.W_out_.rows() == rc.W_in_.cols() && rc.W_out_.cols() == rc.W_.rows(),
                "reservoir: W_out shape mismatch");
        return rc;
    }

    int reservoir_dim() const { return static_cast<int>(W_.rows()); }
    int obs_dim() const { return static_cast<int>(W_in_.cols()); }
    const ReservoirConfig& config() const { return cfg_; }
    const Mat& W() const { return W_; }
    const Mat& W_in() const { return W_in_; }
    const Vec& bias() const { return b_; }
    const Mat& W_out() const { return W_out_; }
    void set_W_out(const Mat& w) {
        require(w.rows() == obs_dim() && w.cols() == reservoir_dim(), "reservoir: W_out shape");
        W_out_ = w;
    }

    Vec update(const Vec& r, const Vec& u) const {
        return cfg_.alpha * r + (1.0 - cfg_.alpha) * (W_ * r + W_in_ * u + b_).array().tanh().matrix();
    }

    // Drives the reservoir from the zero state; returns T x M states.
    Mat drive(const Mat& inputs) const {
        require(inputs.cols() == obs_dim(), "reservoir drive: input dimension mismatch");
        Mat states(inputs.rows(), reservoir_dim());
        Vec r = Vec::Zero(reservoir_dim());
        for (int t = 0; t < inputs.rows(); ++t) {
            r = update(r, inputs.row(t));
            states.row(t) = r;
        }
        return states;
    }

    // Closed-loop rollout: warm up on x_warm, then feed predictions back as
    // inputs. Returns steps x N generated observations.
    Mat rollout(const Mat& x_warm, int steps, bool* diverged = nullptr,
                double divergence_bound = 1e6) const {
        require(x_warm.rows() >= 1, "reservoir rollout: need at least one warm-up row");
        Vec r = Vec::Zero(reservoir_dim());
        for (int t = 0; t < x_warm.rows(); ++t) r = update(r, x_warm.row(t));
        Mat out(steps, obs_dim());
        Vec u = W_out_ * r;
        if (diverged) *diverged = false;
        for (int t = 0; t < steps; ++t) {
            r = update(r, u);
            u = W_out_ * r;
            out.row(t) = u;
            if (!u.allFinite() || u.cwiseAbs().maxCoeff() > divergence_bound) {
                if (diverged) *diverged = true;
                out.conservativeResize(t + 1, Eigen::NoChange);
                break;
            }
        }
        return out;
    }

    // Same warm-up, but returns the reservoir-state orbit of the autonomous
    // closed-loop map (for Lyapunov analysis).
    Vec closed_loop_state(const Mat& x_warm) const {
        Vec r = Vec::Zero(reservoir_dim());
        for (int t = 0; t < x_warm.rows(); ++t) r = update(r, x_warm.row(t));
        return r;
    }

    Vec closed_loop_step(const Vec& r) const { return update(r, W_out_ * r); }

    // d r' / d r of the closed-loop map.
    Mat closed_loop_jacobian(const Vec& r) const {
        const Vec pre = W_ * r + W_in_ * (W_out_ * r) + b_;
        const Vec gate = (1.0 - pre.array().tanh().square()).matrix();
        Mat j = (W_ + W_in_ * W_out_);
        j.array().colwise() *= (1.0 - cfg_.alpha) * gate.array();
        j += cfg_.alpha * Mat::Identity(reservoir_dim(), reservoir_dim());
        return j;
    }

    // Applies the closed-loop Jacobian to a tangent block without forming the
    // full matrix (V is M x k).
    void closed_loop_tangent(const Vec& r, Mat& V) const {
        const Vec pre = W_ * r + W_in_ * (W_out_ * r) + b_;
        const Vec gate = (1.0 - pre.array().tanh().square()).matrix();
        Mat WV = W_ * V + W_in_ * (W_out_ * V);
        WV.array().colwise() *= (1.0 - cfg_.alpha) * gate.array();
        V = cfg_.alpha * V + WV;
    }

  private:
    ReservoirConfig cfg_;
    Mat W_;
    Mat W_in_;
    Vec b_;
    Mat W_out_;
};

// Closed-form readout fit: W_out = X R^T (R R^T + ridge I)^-1 with states and
// targets given row-wise (T x M and T x N). ridge = 0 reproduces the plain
// pseudo-inverse form and raises on a singular normal matrix.
inline Mat rc_fit_readout(const Mat& states, const Mat& targets, double ridge) {
    require(states.rows() == targets.rows(), "rc_fit_readout: row count mismatch");
    require(ridge >= 0.0, "rc_fit_readout: ridge must be non-negative");
    const int m = static_cast<int>(states.cols());
    require(states.rows() >= m || ridge > 0.0, "rc_fit_readout: need T >= M or positive ridge");
    Mat gram = states.transpose() * states;  // R R^T in column convention
    gram.diagonal().array() += ridge;
    Eigen::LDLT<Mat> ldlt(gram);
    if (ldlt.info() != Eigen::Success)
        throw ConditioningError("rc_fit_readout: normal matrix factorization failed");
    const Vec d = ldlt.vectorD().cwiseAbs();
    if (ridge == 0.0 && d.minCoeff() < 1e-13 * d.maxCoeff())
        throw ConditioningError("rc_fit_readout: singular normal matrix with ridge = 0");
    Mat w_out_t = ldlt.solve(states.transpose() * targets);  // M x N
    return w_out_t.transpose();
}

inline void rc_train(Reservoir& rc, const Mat& inputs, const Mat& targets) {
    const Mat states = rc.drive(inputs);
    rc.set_W_out(rc_fit_readout(states, targets, rc.config().ridge));
}

// Trains the readout on next-step pairs: the reservoir is driven with
// x_0..x_{T-2} per trajectory (state reset between trajectories) and the
// readout maps r_t to x_{t+1}, which is what the closed-loop feedback
// iterates. The first `washout` driven states of each trajectory are dropped
// from the regression; they carry the zero-state transient and destabilize
// the closed loop if kept.
inline void rc_train_next_step(Reservoir& rc, const std::vector<Mat>& trajectories, int washout = 100) {
    require(!trajectories.empty(), "rc_train_next_step: no trajectories");
    long total = 0;
    std::vector<Mat> state_blocks, target_blocks;
    for (const Mat& m : trajectories) {
        require(m.rows() > washout + 1, "rc_train_next_step: trajectory shorter than washout");
        const Mat states = rc.drive(m.topRows(m.rows() - 1));
        state_blocks.push_back(states.bottomRows(states.rows() - washout));
        target_blocks.push_back(m.middleRows(1 + washout, m.rows() - 1 - washout));
        total += state_blocks.back().rows();
    }
    Mat states(total, rc.reservoir_dim()), targets(total, rc.obs_dim());
    long off = 0;
    for (std::size_t i = 0; i < state_blocks.size(); ++i) {
        states.middleRows(off, state_blocks[i].rows()) = state_blocks[i];
        targets.middleRows(off, state_blocks[i].rows()) = target_blocks[i];
        off += state_blocks[i].rows();
    }
    rc.set_W_out(rc_fit_readout(states, targets, rc.config().ridge));
}

}  // namespace dsr
