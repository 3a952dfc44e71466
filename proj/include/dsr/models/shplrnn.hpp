#pragma once

#include "dsr/common.hpp"

namespace dsr {

// Clipped shallow piecewise-linear RNN:
//   z' = A z + W1 [relu(W2 z + h2) - relu(W2 z)] + h1
// with diagonal A. The observation model is the identity projection onto the
// first N latent coordinates. The relu derivative uses the strict convention
// (derivative 0 at the kink).
struct ShPLRNN {
    Vec A;   // diagonal of the M x M matrix
    Mat W1;  // M x H
    Mat W2;  // H x M
    Vec h1;  // M
    Vec h2;  // H
    int obs_dim = 0;

    int latent_dim() const { return static_cast<int>(A.size()); }
    int hidden_dim() const { return static_cast<int>(h2.size()); }

    void check() const {
        const int m = latent_dim(), h = hidden_dim();
        require(W1.rows() == m && W1.cols() == h, "shplrnn: W1 shape");
        require(W2.rows() == h && W2.cols() == m, "shplrnn: W2 shape");
        require(h1.size() == m, "shplrnn: h1 shape");
        require(obs_dim >= 1 && obs_dim <= m, "shplrnn: observation dim must satisfy 1 <= N <= M");
    }

    int parameter_count() const {
        return latent_dim() + 2 * latent_dim() * hidden_dim() + latent_dim() + hidden_dim();
    }

    Vec step(const Vec& z) const {
        const Vec pre = W2 * z;
        const Vec d = (pre + h2).cwiseMax(0.0) - pre.cwiseMax(0.0);
        return A.cwiseProduct(z) + W1 * d + h1;
    }

    Mat jacobian(const Vec& z) const {
        const Vec pre = W2 * z;
        Mat j = Mat(A.asDiagonal());
        for (int k = 0; k < hidden_dim(); ++k) {
            const double dk = (pre[k] + h2[k] > 0.0 ? 1.0 : 0.0) - (pre[k] > 0.0 ? 1.0 : 0.0);
            if (dk != 0.0) j.noalias() += dk * (W1.col(k) * W2.row(k));
        }
        return j;
    }

    // Latent state for an observation: read-out coordinates carry the
    // (standardized) observation, free coordinates start at zero.
    Vec latent_from_observation(const Vec& x) const {
        Vec z = Vec::Zero(latent_dim());
        z.head(obs_dim) = x;
        return z;
    }

    Vec observe(const Vec& z) const { return z.head(obs_dim); }

    // Free-running latent rollout; returns (steps+1) x M including z0.
    Mat rollout(const Vec& z0, int steps) const {
        Mat out(steps + 1, latent_dim());
        Vec z = z0;
        out.row(0) = z;
        for (int t = 1; t <= steps; ++t) {
            z = step(z);
            out.row(t) = z;
        }
        return out;
    }

    // Parameters flattened in the fixed order A, W1, W2, h1, h2 (row-major).
    Vec flatten() const {
        Vec theta(parameter_count());
        int off = 0;
        theta.segment(off, A.size()) = A;
        off += static_cast<int>(A.size());
        for (int i = 0; i < W1.rows(); ++i) {
            theta.segment(off, W1.cols()) = W1.row(i);
            off += static_cast<int>(W1.cols());
        }
        for (int i = 0; i < W2.rows(); ++i) {
            theta.segment(off, W2.cols()) = W2.row(i);
            off += static_cast<int>(W2.cols());
        }
        theta.segment(off, h1.size()) = h1;
        off += static_cast<int>(h1.size());
        theta.segment(off, h2.size()) = h2;
        return theta;
    }

    void unflatten(const Vec& theta) {
        require(theta.size() == parameter_count(), "shplrnn: parameter vector size mismatch");
        int off = 0;
        A = theta.segment(off, A.size());
        off += static_cast<int>(A.size());
        for (int i = 0; i < W1.rows(); ++i) {
            W1.row(i) = theta.segment(off, W1.cols());
            off += static_cast<int>(W1.cols());
        }
        for (int i = 0; i < W2.rows(); ++i) {
            W2.row(i) = theta.segment(off, W2.cols());
            off += static_cast<int>(W2.cols());
        }
        h1 = theta.segment(off, h1.size());
        off += static_cast<int>(h1.size());
        h2 = theta.segment(off, h2.size());
    }

    static ShPLRNN zeros(int latent, int hidden, int obs) {
        ShPLRNN m;
        m.A = Vec::Zero(latent);
        m.W1 = Mat::Zero(latent, hidden);
        m.W2 = Mat::Zero(hidden, latent);
        m.h1 = Vec::Zero(latent);
        m.h2 = Vec::Zero(hidden);
        m.obs_dim = obs;
        return m;
    }
};

}  // namespace dsr
