#pragma once

#include <cstdint>

#include "dsr/common.hpp"

namespace dsr {

enum class OptimizerKind { RAdam, Adam };

struct TrainConfig {
    int steps = 20000;      // SGD update count (desk scale; paper scale 250k)
    int batch_size = 32;
    int seq_len = 100;      // T_s
    int tf_interval = 15;   // tau
    double lr_start = 1e-3;
    double lr_end = 1e-6;
    OptimizerKind optimizer = OptimizerKind::RAdam;
    int warmup_steps = 500;  // linear warmup for the plain-Adam fallback
    std::uint64_t seed = 0;
    int jobs = 1;
    int record_every = 1;  // loss curve recording interval

    void check() const {
        require(steps >= 1 && batch_size >= 1, "train: steps and batch_size must be positive");
        require(tf_interval >= 1, "train: tau must be >= 1");
        require(seq_len > tf_interval, "train: T_s must exceed tau");
        require(lr_start >= lr_end && lr_end > 0.0, "train: need lr_start >= lr_end > 0");
    }
};

// Exponential decay: lr_start at t = 0, lr_end at t = steps.
inline double lr_at(const TrainConfig& cfg, int step) {
    return cfg.lr_start * std::pow(cfg.lr_end / cfg.lr_start, static_cast<double>(step) / cfg.steps);
}

// Rectified/plain adaptive-moment update with the standard constants.
class AdamState {
  public:
    explicit AdamState(int dim) : m_(Vec::Zero(dim)), v_(Vec::Zero(dim)) {}

    void step(Vec& theta, const Vec& grad, double lr, OptimizerKind kind, int warmup_steps = 500) {
        static constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
        ++t_;
        m_ = beta1 * m_ + (1.0 - beta1) * grad;
        v_ = beta2 * v_ + (1.0 - beta2) * grad.cwiseProduct(grad);
        const double bc1 = 1.0 - std::pow(beta1, t_);
        const double bc2 = 1.0 - std::pow(beta2, t_);
        if (kind == OptimizerKind::RAdam) {
            const double rho_inf = 2.0 / (1.0 - beta2) - 1.0;
            const double beta2_t = std::pow(beta2, t_);
            const double rho_t = rho_inf - 2.0 * t_ * beta2_t / (1.0 - beta2_t);
            if (rho_t > 4.0) {
                const double rect = std::sqrt(((rho_t - 4.0) * (rho_t - 2.0) * rho_inf) /
                                              ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t));
                theta.array() -= (lr * rect / bc1) * m_.array() / ((v_.array() / bc2).sqrt() + eps);
            } else {
                theta -= (lr / bc1) * m_;
            }
        } else {
            const double warm = warmup_steps > 0 ? std::min(1.0, static_cast<double>(t_) / warmup_steps) : 1.0;
            theta.array() -= (warm * lr / bc1) * m_.array() / ((v_.array() / bc2).sqrt() + eps);
        }
    }

    int updates() const { return t_; }

  private:
    Vec m_, v_;
    int t_ = 0;
};

struct LossReport {
    std::vector<double> steps;
    std::vector<double> loss;
    std::vector<double> lr;
    double final_loss = 0.0;
    double wall_seconds = 0.0;
};

}  // namespace dsr
