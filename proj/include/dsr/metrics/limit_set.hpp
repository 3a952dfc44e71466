#pragma once

#include <algorithm>
#include <unordered_map>
#include <vector>

#include "dsr/common.hpp"

namespace dsr {

// Hausdorff distance between two non-empty point sets (rows) under the
// Euclidean metric.
inline double hausdorff(const Mat& x, const Mat& y) {
    require(x.rows() > 0 && y.rows() > 0, "hausdorff: empty set");
    require(x.cols() == y.cols(), "hausdorff: dimension mismatch");
    auto directed = [](const Mat& a, const Mat& b) {
        double worst = 0.0;
        for (int i = 0; i < a.rows(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int j = 0; j < b.rows(); ++j) {
                const double d = (a.row(i) - b.row(j)).squaredNorm();
                if (d < best) {
                    best = d;
                    if (best <= worst) break;  // cannot raise the supremum
                }
            }
            if (best > worst) worst = best;
        }
        return std::sqrt(worst);
    };
    return std::max(directed(x, y), directed(y, x));
}

// Shannon entropy (nats) of the histogram of points over a fixed box
// partition with `bins` cells per dimension. Points outside the box are
// clamped into the boundary cells.
inline double shannon_entropy_box(const Mat& points, const Vec& lo, const Vec& hi, int bins) {
    require(points.rows() > 0, "entropy: no points");
    require(lo.size() == points.cols() && hi.size() == points.cols(), "entropy: box dimension mismatch");
    require(bins >= 1, "entropy: bins must be positive");
    const int n = static_cast<int>(points.cols());
    std::unordered_map<long long, long long> counts;
    for (int i = 0; i < points.rows(); ++i) {
        long long key = 0;
        for (int d = 0; d < n; ++d) {
            const double u = (points(i, d) - lo[d]) / (hi[d] - lo[d]);
            int cell = static_cast<int>(u * bins);
            cell = std::clamp(cell, 0, bins - 1);
            key = key * bins + cell;
        }
        ++counts[key];
    }
    const double total = static_cast<double>(points.rows());
    double h = 0.0;
    for (const auto& [key, c] : counts) {
        const double p = c / total;
        h -= p * std::log(p);
    }
    return std::max(h, 0.0);
}

struct Ecdf {
    std::vector<double> values;     // sorted
    std::vector<double> fractions;  // cumulative, ending at 1

    double at(double x) const {
        const auto it = std::upper_bound(values.begin(), values.end(), x);
        if (it == values.begin()) return 0.0;
        return fractions[static_cast<std::size_t>(it - values.begin()) - 1];
    }

    double quantile(double q) const {
        require(!values.empty(), "ecdf: empty");
        const double target = std::clamp(q, 0.0, 1.0);
        for (std::size_t i = 0; i < fractions.size(); ++i)
            if (fractions[i] >= target) return values[i];
        return values.back();
    }
};

// Empirical cumulative distribution function of a value list.
inline Ecdf ecdf(std::vector<double> values) {
    require(!values.empty(), "ecdf: empty value list");
    std::sort(values.begin(), values.end());
    Ecdf e;
    e.values = std::move(values);
    e.fractions.resize(e.values.size());
    const double n = static_cast<double>(e.values.size());
    for (std::size_t i = 0; i < e.values.size(); ++i) e.fractions[i] = (i + 1) / n;
    return e;
}

}  // namespace dsr
