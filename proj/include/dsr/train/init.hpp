#pragma once

#include "dsr/models/mlp_ode.hpp"
#include "dsr/models/shplrnn.hpp"
#include "dsr/rng.hpp"

namespace dsr {

enum class InitScheme { GlorotUniform, GlorotNormal };

struct InitConfig {
    InitScheme scheme = InitScheme::GlorotUniform;
    double gain = 1.0;  // scales the Glorot standard deviation

    void check() const { require(gain >= 0.0, "init: gain must be non-negative"); }
};

namespace detail {

// Glorot draw with variance gain^2 * 2 / (fan_in + fan_out).
inline double glorot_draw(Rng& rng, const InitConfig& cfg, int fan_in, int fan_out) {
    const double denom = static_cast<double>(fan_in + fan_out);
    if (cfg.scheme == InitScheme::GlorotUniform) {
        const double limit = cfg.gain * std::sqrt(6.0 / denom);
        return rng.uniform(-limit, limit);
    }
    return cfg.gain * std::sqrt(2.0 / denom) * rng.normal();
}

inline Mat glorot_mat(Rng& rng, const InitConfig& cfg, int rows, int cols, int fan_in, int fan_out) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = glorot_draw(rng, cfg, fan_in, fan_out);
    return m;
}

}  // namespace detail

// Weights drawn per scheme; the output bias h1 is zero; A uniform in (0, 1).
// The hidden threshold h2 is drawn like a W2 entry: it shifts the clipping
// kinks, and with h2 = 0 the clipped nonlinearity cancels identically, so the
// threshold shares the weight initialization rather than the zero-bias one.
inline ShPLRNN init_shplrnn(int latent, int hidden, int obs_dim, const InitConfig& cfg, std::uint64_t seed) {
    cfg.check();
    Rng rng(derive_seed(seed, "shplrnn-init"));
    ShPLRNN m = ShPLRNN::zeros(latent, hidden, obs_dim);
    m.A = rng.uniform_vec(latent, 0.0, 1.0);
    m.W1 = detail::glorot_mat(rng, cfg, latent, hidden, hidden, latent);
    m.W2 = detail::glorot_mat(rng, cfg, hidden, latent, latent, hidden);
    for (int i = 0; i < hidden; ++i) m.h2[i] = detail::glorot_draw(rng, cfg, latent, hidden);
    return m;
}

inline MLPOdeField init_mlp(int dim, const std::vector<int>& hidden, Activation act, const InitConfig& cfg,
                            std::uint64_t seed) {
    cfg.check();
    Rng rng(derive_seed(seed, "mlp-init"));
    MLPOdeField f = MLPOdeField::zeros(dim, hidden, act);
    for (int l = 0; l < f.layer_count(); ++l) {
        const int fan_in = static_cast<int>(f.weights[l].cols());
        const int fan_out = static_cast<int>(f.weights[l].rows());
        f.weights[l] = detail::glorot_mat(rng, cfg, fan_out, fan_in, fan_in, fan_out);
    }
    return f;
}

}  // namespace dsr
