#pragma once

#include <chrono>
#include <vector>

#include "dsr/models/mlp_ode.hpp"
#include "dsr/rng.hpp"
#include "dsr/train/bptt.hpp"
#include "dsr/train/optimizer.hpp"

namespace dsr {

// Gradient of the MSE rollout loss through an unrolled fixed-step RK4
// integration of the MLP field (discretize-then-optimize). The rollout starts
// from the first observation; predictions at indices 1..T-1 are compared with
// the data.
inline double node_sequence_grad(const MLPOdeField& field, const Mat& seq, double dt,
                                 MLPOdeField::Grads& grads) {
    const int t_len = static_cast<int>(seq.rows());
    const int n = field.dim();
    require(seq.cols() == n, "node: sequence width mismatch");

    struct StepCache {
        MLPOdeField::Cache c1, c2, c3, c4;
        Vec k1, k2, k3, k4;
        Vec x_in;
    };
    std::vector<StepCache> steps(t_len - 1);
    Mat states(t_len, n);
    Vec x = seq.row(0);
    states.row(0) = x;
    for (int t = 1; t < t_len; ++t) {
        StepCache& sc = steps[t - 1];
        sc.x_in = x;
        sc.k1 = field.forward_cached(x, sc.c1);
        sc.k2 = field.forward_cached(x + (0.5 * dt) * sc.k1, sc.c2);
        sc.k3 = field.forward_cached(x + (0.5 * dt) * sc.k2, sc.c3);
        sc.k4 = field.forward_cached(x + dt * sc.k3, sc.c4);
        x += (dt / 6.0) * (sc.k1 + 2.0 * sc.k2 + 2.0 * sc.k3 + sc.k4);
        states.row(t) = x;
    }

    const double norm = 1.0 / (static_cast<double>(n) * t_len);
    double loss = 0.0;
    for (int t = 1; t < t_len; ++t) loss += (states.row(t) - seq.row(t)).squaredNorm();
    loss *= norm;

    Vec adj = Vec::Zero(n);
    for (int t = t_len - 1; t >= 1; --t) {
        adj += 2.0 * norm * (states.row(t) - seq.row(t)).transpose();
        const StepCache& sc = steps[t - 1];
        const Vec a_k4 = (dt / 6.0) * adj;
        const Vec a_x4 = field.backward(sc.c4, a_k4, grads);
        const Vec a_k3 = (dt / 3.0) * adj + dt * a_x4;
        const Vec a_x3 = field.backward(sc.c3, a_k3, grads);
        const Vec a_k2 = (dt / 3.0) * adj + (0.5 * dt) * a_x3;
        const Vec a_x2 = field.backward(sc.c2, a_k2, grads);
        const Vec a_k1 = (dt / 6.0) * adj + (0.5 * dt) * a_x2;
        const Vec a_x1 = field.backward(sc.c1, a_k1, grads);
        adj += a_x4 + a_x3 + a_x2 + a_x1;
    }
    return loss;
}

inline double node_gradient(const MLPOdeField& field, const std::vector<Mat>& batch, double dt,
                            MLPOdeField::Grads& grads, int jobs = 1) {
    grads.init_like(field);
    const int b = static_cast<int>(batch.size());
    require(b >= 1, "node: empty batch");
    // reduced in batch order, so the result is worker-count independent
    std::vector<MLPOdeField::Grads> per_seq(b);
    std::vector<double> per_loss(b, 0.0);
    auto work = [&](int i) {
        per_seq[i].init_like(field);
        per_loss[i] = node_sequence_grad(field, batch[i], dt, per_seq[i]);
    };
    if (jobs <= 1 || b == 1) {
        for (int i = 0; i < b; ++i) work(i);
    } else {
        const int workers = std::min(jobs, b);
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w)
            threads.emplace_back([&, w]() {
                for (int i = w; i < b; i += workers) work(i);
            });
        for (auto& th : threads) th.join();
    }
    double loss = 0.0;
    for (int i = 0; i < b; ++i) {
        grads.add_scaled(per_seq[i], 1.0);
        loss += per_loss[i];
    }
    for (auto& w : grads.weights) w /= b;
    for (auto& bv : grads.biases) bv /= b;
    return loss / b;
}

struct NodeTrainResult {
    MLPOdeField field;
    LossReport report;
};

// Same SGD loop as the RNN side, with T_s = 30 subsequences by default and
// gradients through the fixed-step RK4 rollout.
inline NodeTrainResult train_mlp_ode(MLPOdeField field, const std::vector<Mat>& trajectories, double dt,
                                     TrainConfig cfg) {
    cfg.check();
    require(!trajectories.empty(), "node: no trajectories");
    const auto start_time = std::chrono::steady_clock::now();
    Rng rng(derive_seed(cfg.seed, "node-batches"));

    Vec theta = field.flatten();
    AdamState opt(static_cast<int>(theta.size()));
    MLPOdeField::Grads grads;
    LossReport report;
    std::vector<Mat> batch(cfg.batch_size);
    MLPOdeField flat_view = field;  // scratch for flattening gradients

    for (int step = 0; step < cfg.steps; ++step) {
        for (int i = 0; i < cfg.batch_size; ++i) batch[i] = sample_subsequence(trajectories, cfg.seq_len, rng);
        const double loss = node_gradient(field, batch, dt, grads, cfg.jobs);
        if (!std::isfinite(loss))
            throw NumericalError("train_mlp_ode: non-finite loss at step " + std::to_string(step));
        const double lr = lr_at(cfg, step);
        flat_view.weights = grads.weights;
        flat_view.biases = grads.biases;
        opt.step(theta, flat_view.flatten(), lr, cfg.optimizer, cfg.warmup_steps);
        field.unflatten(theta);
        if (step % cfg.record_every == 0 || step == cfg.steps - 1) {
            report.steps.push_back(step);
            report.loss.push_back(loss);
            report.lr.push_back(lr);
        }
    }
    report.final_loss = report.loss.empty() ? 0.0 : report.loss.back();
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    return {std::move(field), std::move(report)};
}

}  // namespace dsr
