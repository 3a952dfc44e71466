#pragma once

#include <algorithm>
#include <vector>

#include "dsr/common.hpp"
#include "dsr/rng.hpp"

namespace dsr {

struct SlicedW1Config {
    int directions = 1000;  // L
    double dq = 1e-3;       // quantile resolution
    std::uint64_t seed = 0;

    void check() const {
        require(directions >= 1, "sliced_w1: need at least one direction");
        require(dq > 0.0 && dq <= 1.0, "sliced_w1: dq must lie in (0, 1]");
    }
};

namespace detail {

// Empirical quantile at q: order statistic ceil(q*T), no interpolation.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    const int t_len = static_cast<int>(sorted.size());
    int idx = static_cast<int>(std::ceil(q * t_len));
    idx = std::clamp(idx, 1, t_len);
    return sorted[idx - 1];
}

// W1 between two sorted samples as a Riemann sum over quantile midpoints.
inline double w1_sorted(const std::vector<double>& a, const std::vector<double>& b, double dq) {
    const int n_q = std::max(1, static_cast<int>(std::llround(1.0 / dq)));
    const double weight = 1.0 / n_q;
    double total = 0.0;
    for (int j = 0; j < n_q; ++j) {
        const double q = (j + 0.5) * weight;
        total += std::abs(quantile_sorted(a, q) - quantile_sorted(b, q));
    }
    return total * weight;
}

}  // namespace detail

// One-dimensional Wasserstein-1 distance via the quantile-function integral
// at resolution dq.
inline double w1_1d(const Vec& a, const Vec& b, double dq = 1e-3) {
    require(a.size() > 0 && b.size() > 0, "w1_1d: empty sample");
    require(dq > 0.0 && dq <= 1.0, "w1_1d: dq must lie in (0, 1]");
    std::vector<double> sa(a.data(), a.data() + a.size());
    std::vector<double> sb(b.data(), b.data() + b.size());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return detail::w1_sorted(sa, sb, dq);
}

// Monte-Carlo sliced Wasserstein-1 distance between two empirical measures
// given as point rows. Directions are normalized Gaussian draws; each
// direction's sign is canonicalized (first non-zero component positive),
// which leaves the projected W1 unchanged and makes the one-dimensional case
// agree with w1_1d exactly.
inline double sliced_w1(const Mat& mu, const Mat& nu, const SlicedW1Config& cfg = {}) {
    cfg.check();
    require(mu.cols() == nu.cols(), "sliced_w1: dimension mismatch");
    require(mu.rows() > 0 && nu.rows() > 0, "sliced_w1: empty sample");
    const int n = static_cast<int>(mu.cols());
    Rng rng(derive_seed(cfg.seed, "sw1-directions"));

    std::vector<double> pa(mu.rows()), pb(nu.rows());
    double total = 0.0, comp = 0.0;  // Kahan-compensated mean
    for (int l = 0; l < cfg.directions; ++l) {
        Vec xi = rng.unit_vec(n);
        for (int i = 0; i < n; ++i) {
            if (xi[i] != 0.0) {
                if (xi[i] < 0.0) xi = -xi;
                break;
            }
        }
        Eigen::Map<Vec>(pa.data(), mu.rows()) = mu * xi;
        Eigen::Map<Vec>(pb.data(), nu.rows()) = nu * xi;
        std::sort(pa.begin(), pa.end());
        std::sort(pb.begin(), pb.end());
        const double y = detail::w1_sorted(pa, pb, cfg.dq) - comp;
        const double t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    return total / cfg.directions;
}

}  // namespace dsr
