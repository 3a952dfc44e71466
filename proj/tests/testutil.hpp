#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "dsr/common.hpp"
#include "dsr/rng.hpp"

namespace testutil {

// Central finite differences of a vector field, for Jacobian oracles.
template <typename F>
dsr::Mat fd_jacobian(const F& f, const dsr::Vec& x, double h = 1e-6) {
    const dsr::Vec fx = f(x);
    dsr::Mat jac(fx.size(), x.size());
    for (int j = 0; j < x.size(); ++j) {
        dsr::Vec xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return jac;
}

inline double rel_err(const dsr::Mat& a, const dsr::Mat& b) {
    const double denom = std::max(1e-12, b.norm());
    return (a - b).norm() / denom;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-12, std::abs(b)); }

}  // namespace testutil
