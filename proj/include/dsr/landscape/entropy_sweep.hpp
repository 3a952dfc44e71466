#pragma once

#include "dsr/grid.hpp"
#include "dsr/metrics/limit_set.hpp"
#include "dsr/parallel.hpp"
#include "dsr/train/init.hpp"

namespace dsr {

struct EntropySweepConfig {
    int latent_dim = 2;
    int hidden_dim = 100;
    int obs_dim = 2;
    InitScheme scheme = InitScheme::GlorotUniform;
    std::vector<double> gains = {0.3, 0.6, 1.0, 1.5, 2.0};
    int models_per_gain = 20;
    int transient_steps = 2000;
    int tail_steps = 200;
    int bins = 64;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct GainSweepResult {
    std::vector<double> gains;
    std::vector<std::vector<double>> entropies;  // one sample per initialized model
    std::vector<double> mean_entropy;
    std::vector<double> max_entropy;
};

// Shannon entropy of the pooled limit-set points of one freshly initialized
// model, evolved from every grid initial condition. After the fixed transient
// a polish phase keeps stepping while the orbit still contracts geometrically
// toward a point, so slow linear modes (A close to 1) land on their fixed
// point instead of leaving a smeared tail. Tail points are snapped to a 1e-9
// lattice so coincident points separated by floating-point noise cannot
// straddle a cell boundary.
inline double limit_set_entropy(const ShPLRNN& model, const Grid& grid, int bins, int transient_steps,
                                int tail_steps) {
    const auto ics = grid.points();
    Mat pooled(static_cast<int>(ics.size()) * tail_steps, model.obs_dim);
    int row = 0;
    for (const Vec& ic : ics) {
        Vec z = model.latent_from_observation(ic);
        for (int t = 0; t < transient_steps; ++t) z = model.step(z);
        constexpr int polish_chunk = 8000;
        constexpr int polish_chunks_max = 25;
        constexpr double converged_tol = 1e-11;
        double delta = (model.step(z) - z).norm();
        for (int chunk = 0; chunk < polish_chunks_max && delta > converged_tol; ++chunk) {
            const double before = delta;
            for (int t = 0; t < polish_chunk; ++t) z = model.step(z);
            delta = (model.step(z) - z).norm();
            if (delta > 0.5 * before) break;  // cycle or chaos, not a fixed point
        }
        for (int t = 0; t < tail_steps; ++t) {
            z = model.step(z);
            for (int d = 0; d < model.obs_dim; ++d)
                pooled(row, d) = std::round(z[d] * 1e9) * 1e-9;
            ++row;
        }
    }
    return shannon_entropy_box(pooled, grid.lo, grid.hi, bins);
}

// Initialization complexity sweep: the distribution of limit-set entropies of
// randomly initialized models as a function of the Glorot gain.
inline GainSweepResult entropy_gain_sweep(const EntropySweepConfig& cfg, const Grid& grid) {
    GainSweepResult result;
    result.gains = cfg.gains;
    result.entropies.resize(cfg.gains.size());
    for (auto& e : result.entropies) e.resize(cfg.models_per_gain);

    const int total = static_cast<int>(cfg.gains.size()) * cfg.models_per_gain;
    parallel_for(total, cfg.jobs, [&](int idx) {
        const int g = idx / cfg.models_per_gain;
        const int k = idx % cfg.models_per_gain;
        InitConfig init_cfg;
        init_cfg.scheme = cfg.scheme;
        init_cfg.gain = cfg.gains[g];
        const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(idx));
        ShPLRNN model = init_shplrnn(cfg.latent_dim, cfg.hidden_dim, cfg.obs_dim, init_cfg, seed);
        result.entropies[g][k] =
            limit_set_entropy(model, grid, cfg.bins, cfg.transient_steps, cfg.tail_steps);
    });

    for (const auto& samples : result.entropies) {
        double mean = 0.0, mx = 0.0;
        for (double h : samples) {
            mean += h;
            mx = std::max(mx, h);
        }
        result.mean_entropy.push_back(mean / samples.size());
        result.max_entropy.push_back(mx);
    }
    return result;
}

// Spearman rank correlation (average ranks for ties).
inline double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, "spearman: need matched samples");
    auto ranks = [](const std::vector<double>& v) {
        const int n = static_cast<int>(v.size());
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        int i = 0;
        while (i < n) {
            int j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * (i + j) + 1.0;
            for (int k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> rx = ranks(x), ry = ranks(y);
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mean_x += rx[i];
        mean_y += ry[i];
    }
    mean_x /= rx.size();
    mean_y /= ry.size();
    double cov = 0.0, var_x = 0.0, var_y = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        cov += (rx[i] - mean_x) * (ry[i] - mean_y);
        var_x += sq(rx[i] - mean_x);
        var_y += sq(ry[i] - mean_y);
    }
    require(var_x > 0.0 && var_y > 0.0, "spearman: constant input");
    return cov / std::sqrt(var_x * var_y);
}

}  // namespace dsr
