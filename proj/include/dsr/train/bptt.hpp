#pragma once

#include <chrono>
#include <thread>
#include <vector>

#include "dsr/models/shplrnn.hpp"
#include "dsr/rng.hpp"
#include "dsr/train/optimizer.hpp"

namespace dsr {

// Identity sparse teacher forcing: the latent state at index 0 carries the
// first observation on its read-out coordinates (free coordinates zero), and
// at every index t in {tau, 2 tau, ...} the read-out coordinates are
// overwritten with the observation before the next step. Predictions are the
// read-out coordinates at every index, taken before the overwrite.
inline bool stf_forced_index(int t, int tau) { return t > 0 && t % tau == 0; }

struct StfTrace {
    Mat predictions;           // T x N
    std::vector<Vec> fed;      // z-tilde fed into each step, indices 0..T-2
    std::vector<Vec> pre;      // W2 * z-tilde for those steps
};

namespace detail {

inline void stf_run(const ShPLRNN& model, const Mat& seq, int tau, StfTrace* trace, Mat* predictions) {
    const int t_len = static_cast<int>(seq.rows());
    const int n = model.obs_dim;
    require(seq.cols() == n, "stf: sequence width must equal the observation dim");
    Vec z = model.latent_from_observation(seq.row(0));
    if (predictions) predictions->row(0) = z.head(n);
    if (trace) {
        trace->fed.resize(t_len - 1);
        trace->pre.resize(t_len - 1);
    }
    for (int t = 1; t < t_len; ++t) {
        // z currently holds the state at index t-1 (already forced if due)
        const Vec pre = model.W2 * z;
        if (trace) {
            trace->fed[t - 1] = z;
            trace->pre[t - 1] = pre;
        }
        const Vec d = (pre + model.h2).cwiseMax(0.0) - pre.cwiseMax(0.0);
        z = model.A.cwiseProduct(z) + model.W1 * d + model.h1;
        if (predictions) predictions->row(t) = z.head(n);
        if (stf_forced_index(t, tau)) z.head(n) = seq.row(t);
    }
}

}  // namespace detail

inline Mat stf_forward(const ShPLRNN& model, const Mat& seq, int tau) {
    Mat predictions(seq.rows(), model.obs_dim);
    detail::stf_run(model, seq, tau, nullptr, &predictions);
    return predictions;
}

struct ShplrnnGrads {
    Vec A;
    Mat W1;
    Mat W2;
    Vec h1;
    Vec h2;

    void init_like(const ShPLRNN& m) {
        A = Vec::Zero(m.latent_dim());
        W1 = Mat::Zero(m.latent_dim(), m.hidden_dim());
        W2 = Mat::Zero(m.hidden_dim(), m.latent_dim());
        h1 = Vec::Zero(m.latent_dim());
        h2 = Vec::Zero(m.hidden_dim());
    }

    void add(const ShplrnnGrads& o) {
        A += o.A;
        W1 += o.W1;
        W2 += o.W2;
        h1 += o.h1;
        h2 += o.h2;
    }

    void scale(double s) {
        A *= s;
        W1 *= s;
        W2 *= s;
        h1 *= s;
        h2 *= s;
    }

    Vec flatten(const ShPLRNN& like) const {
        ShPLRNN tmp = like;
        tmp.A = A;
        tmp.W1 = W1;
        tmp.W2 = W2;
        tmp.h1 = h1;
        tmp.h2 = h2;
        return tmp.flatten();
    }
};

// MSE loss of the teacher-forced run plus exact reverse-mode gradients.
// Forcing overwrites are constants in the reverse pass: adjoints flowing into
// overwritten coordinates are dropped.
inline double bptt_sequence(const ShPLRNN& model, const Mat& seq, int tau, ShplrnnGrads& grads) {
    const int t_len = static_cast<int>(seq.rows());
    const int n = model.obs_dim;
    StfTrace trace;
    Mat predictions(t_len, n);
    detail::stf_run(model, seq, tau, &trace, &predictions);

    const double norm = 1.0 / (static_cast<double>(n) * t_len);
    double loss = 0.0;
    for (int t = 0; t < t_len; ++t) loss += (predictions.row(t) - seq.row(t)).squaredNorm();
    loss *= norm;

    Vec adj = Vec::Zero(model.latent_dim());
    const int hidden = model.hidden_dim();
    Vec u(hidden), s(hidden), d(hidden), mask1(hidden);
    for (int t = t_len - 1; t >= 1; --t) {
        adj.head(n) += 2.0 * norm * (predictions.row(t) - seq.row(t));

        const Vec& fed = trace.fed[t - 1];
        const Vec& pre = trace.pre[t - 1];
        for (int k = 0; k < hidden; ++k) {
            const double m1 = pre[k] + model.h2[k] > 0.0 ? 1.0 : 0.0;
            const double m2 = pre[k] > 0.0 ? 1.0 : 0.0;
            mask1[k] = m1;
            s[k] = m1 - m2;
            d[k] = m1 * (pre[k] + model.h2[k]) - m2 * pre[k];
        }
        grads.A += adj.cwiseProduct(fed);
        grads.W1.noalias() += adj * d.transpose();
        grads.h1 += adj;
        u.noalias() = model.W1.transpose() * adj;
        grads.h2 += u.cwiseProduct(mask1);
        s = u.cwiseProduct(s);
        grads.W2.noalias() += s * fed.transpose();
        if (t == 1) break;  // index 0 is data on read-out coords, zeros elsewhere
        Vec prev = model.A.cwiseProduct(adj);
        prev.noalias() += model.W2.transpose() * s;
        if (stf_forced_index(t - 1, tau)) prev.head(n).setZero();
        adj = prev;
    }
    return loss;
}

// Batch-averaged loss and gradients. Per-sequence contributions are reduced
// in batch order so the result is independent of the worker count.
inline double bptt_gradient(const ShPLRNN& model, const std::vector<Mat>& batch, int tau, ShplrnnGrads& grads,
                            int jobs = 1) {
    grads.init_like(model);
    const int b = static_cast<int>(batch.size());
    require(b >= 1, "bptt: empty batch");
    std::vector<ShplrnnGrads> per_seq(b);
    std::vector<double> per_loss(b, 0.0);
    auto work = [&](int i) {
        per_seq[i].init_like(model);
        per_loss[i] = bptt_sequence(model, batch[i], tau, per_seq[i]);
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
        grads.add(per_seq[i]);
        loss += per_loss[i];
    }
    grads.scale(1.0 / b);
    return loss / b;
}

// Uniform subsequence sampler (with replacement) over a trajectory list.
inline Mat sample_subsequence(const std::vector<Mat>& trajectories, int seq_len, Rng& rng) {
    const std::size_t k = trajectories.size() == 1 ? 0 : rng.index(trajectories.size());
    const Mat& traj = trajectories[k];
    require(traj.rows() >= seq_len, "train: trajectory shorter than T_s");
    const int max_start = static_cast<int>(traj.rows()) - seq_len;
    const int start = max_start == 0 ? 0 : static_cast<int>(rng.index(max_start + 1));
    return traj.middleRows(start, seq_len);
}

struct ShplrnnTrainResult {
    ShPLRNN model;
    LossReport report;
};

inline ShplrnnTrainResult train_shplrnn(ShPLRNN model, const std::vector<Mat>& trajectories,
                                        const TrainConfig& cfg) {
    cfg.check();
    require(!trajectories.empty(), "train: no trajectories");
    const auto start_time = std::chrono::steady_clock::now();
    Rng rng(derive_seed(cfg.seed, "shplrnn-batches"));

    Vec theta = model.flatten();
    AdamState opt(static_cast<int>(theta.size()));
    ShplrnnGrads grads;
    LossReport report;
    std::vector<Mat> batch(cfg.batch_size);

    for (int step = 0; step < cfg.steps; ++step) {
        for (int i = 0; i < cfg.batch_size; ++i) batch[i] = sample_subsequence(trajectories, cfg.seq_len, rng);
        const double loss = bptt_gradient(model, batch, cfg.tf_interval, grads, cfg.jobs);
        if (!std::isfinite(loss))
            throw NumericalError("train_shplrnn: non-finite loss at step " + std::to_string(step));
        const double lr = lr_at(cfg, step);
        opt.step(theta, grads.flatten(model), lr, cfg.optimizer, cfg.warmup_steps);
        model.unflatten(theta);
        if (step % cfg.record_every == 0 || step == cfg.steps - 1) {
            report.steps.push_back(step);
            report.loss.push_back(loss);
            report.lr.push_back(lr);
        }
    }
    report.final_loss = report.loss.empty() ? 0.0 : report.loss.back();
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    return {std::move(model), std::move(report)};
}

}  // namespace dsr
