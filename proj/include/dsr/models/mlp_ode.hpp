#pragma once

#include <vector>

#include "dsr/common.hpp"

namespace dsr {

enum class Activation { Tanh, Relu };

// MLP vector field for the neural-ODE model: x' = f_theta(x) with input and
// output dimension equal to the state dimension.
struct MLPOdeField {
    std::vector<Mat> weights;  // layer l maps sizes[l] -> sizes[l+1]
    std::vector<Vec> biases;
    Activation activation = Activation::Tanh;

    int layer_count() const { return static_cast<int>(weights.size()); }
    int dim() const { return static_cast<int>(weights.front().cols()); }

    void check() const {
        require(!weights.empty() && weights.size() == biases.size(), "mlp: layer shape mismatch");
        for (int l = 0; l < layer_count(); ++l)
            require(biases[l].size() == weights[l].rows(), "mlp: bias shape mismatch at layer " + std::to_string(l));
        for (int l = 1; l < layer_count(); ++l)
            require(weights[l].cols() == weights[l - 1].rows(), "mlp: weight chain mismatch");
        require(weights.back().rows() == dim(), "mlp: output dim must equal input dim");
    }

    static double act(double v, Activation a) { return a == Activation::Tanh ? std::tanh(v) : std::max(v, 0.0); }
    static double act_deriv(double pre, Activation a) {
        if (a == Activation::Tanh) {
            const double t = std::tanh(pre);
            return 1.0 - t * t;
        }
        return pre > 0.0 ? 1.0 : 0.0;
    }

    Vec vf(const Vec& x) const {
        Vec h = x;
        for (int l = 0; l < layer_count(); ++l) {
            h = weights[l] * h + biases[l];
            if (l + 1 < layer_count())
                for (int i = 0; i < h.size(); ++i) h[i] = act(h[i], activation);
        }
        return h;
    }

    Mat jac(const Vec& x) const {
        Vec h = x;
        Mat j = Mat::Identity(dim(), dim());
        for (int l = 0; l < layer_count(); ++l) {
            const Vec pre = weights[l] * h + biases[l];
            j = weights[l] * j;
            if (l + 1 < layer_count()) {
                h.resize(pre.size());
                for (int i = 0; i < pre.size(); ++i) {
                    h[i] = act(pre[i], activation);
                    j.row(i) *= act_deriv(pre[i], activation);
                }
            }
        }
        return j;
    }

    // Pre-activations per layer, for the reverse pass.
    struct Cache {
        Vec input;
        std::vector<Vec> pre;   // weights[l] * h + biases[l]
        std::vector<Vec> post;  // activation applied (last layer: equal to pre)
    };

    Vec forward_cached(const Vec& x, Cache& cache) const {
        cache.input = x;
        cache.pre.resize(layer_count());
        cache.post.resize(layer_count());
        Vec h = x;
        for (int l = 0; l < layer_count(); ++l) {
            cache.pre[l] = weights[l] * h + biases[l];
            if (l + 1 < layer_count()) {
                h = cache.pre[l];
                for (int i = 0; i < h.size(); ++i) h[i] = act(h[i], activation);
            } else {
                h = cache.pre[l];
            }
            cache.post[l] = h;
        }
        return h;
    }

    struct Grads {
        std::vector<Mat> weights;
        std::vector<Vec> biases;

        void init_like(const MLPOdeField& f) {
            weights.clear();
            biases.clear();
            for (int l = 0; l < f.layer_count(); ++l) {
                weights.push_back(Mat::Zero(f.weights[l].rows(), f.weights[l].cols()));
                biases.push_back(Vec::Zero(f.biases[l].size()));
            }
        }

        void add_scaled(const Grads& other, double s) {
            for (std::size_t l = 0; l < weights.size(); ++l) {
                weights[l] += s * other.weights[l];
                biases[l] += s * other.biases[l];
            }
        }
    };

    // Accumulates parameter gradients for d(loss)/d(output) = gout and returns
    // d(loss)/d(input).
    Vec backward(const Cache& cache, const Vec& gout, Grads& grads) const {
        Vec g = gout;
        for (int l = layer_count() - 1; l >= 0; --l) {
            if (l + 1 < layer_count())
                for (int i = 0; i < g.size(); ++i) g[i] *= act_deriv(cache.pre[l][i], activation);
            const Vec& upstream = l == 0 ? cache.input : cache.post[l - 1];
            grads.weights[l].noalias() += g * upstream.transpose();
            grads.biases[l] += g;
            g = weights[l].transpose() * g;
        }
        return g;
    }

    int parameter_count() const {
        int p = 0;
        for (int l = 0; l < layer_count(); ++l) p += static_cast<int>(weights[l].size() + biases[l].size());
        return p;
    }

    Vec flatten() const {
        Vec theta(parameter_count());
        int off = 0;
        for (int l = 0; l < layer_count(); ++l) {
            for (int i = 0; i < weights[l].rows(); ++i) {
                theta.segment(off, weights[l].cols()) = weights[l].row(i);
                off += static_cast<int>(weights[l].cols());
            }
            theta.segment(off, biases[l].size()) = biases[l];
            off += static_cast<int>(biases[l].size());
        }
        return theta;
    }

    void unflatten(const Vec& theta) {
        require(theta.size() == parameter_count(), "mlp: parameter vector size mismatch");
        int off = 0;
        for (int l = 0; l < layer_count(); ++l) {
            for (int i = 0; i < weights[l].rows(); ++i) {
                weights[l].row(i) = theta.segment(off, weights[l].cols());
                off += static_cast<int>(weights[l].cols());
            }
            biases[l] = theta.segment(off, biases[l].size());
            off += static_cast<int>(biases[l].size());
        }
    }

    static MLPOdeField zeros(int dim, const std::vector<int>& hidden, Activation act = Activation::Tanh) {
        MLPOdeField f;
        f.activation = act;
        std::vector<int> sizes;
        sizes.push_back(dim);
        for (int h : hidden) sizes.push_back(h);
        sizes.push_back(dim);
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            f.weights.push_back(Mat::Zero(sizes[l + 1], sizes[l]));
            f.biases.push_back(Vec::Zero(sizes[l + 1]));
        }
        return f;
    }
};

}  // namespace dsr
