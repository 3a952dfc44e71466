#pragma once

#include <vector>

#include "dsr/common.hpp"

namespace dsr {

// Uniformly spaced evaluation grid: cell centers of an axis-aligned box.
struct Grid {
    Vec lo;
    Vec hi;
    std::vector<int> counts;

    int dim() const { return static_cast<int>(lo.size()); }

    void check() const {
        require(lo.size() == hi.size() && static_cast<int>(counts.size()) == lo.size(), "grid: shape mismatch");
        for (int d = 0; d < dim(); ++d) {
            require(lo[d] < hi[d], "grid: lo must be below hi in every dimension");
            require(counts[d] >= 1, "grid: counts must be positive");
        }
    }

    int size() const {
        int k = 1;
        for (int c : counts) k *= c;
        return k;
    }

    double volume() const {
        double v = 1.0;
        for (int d = 0; d < dim(); ++d) v *= hi[d] - lo[d];
        return v;
    }

    // Grid diameter, used as the divergence penalty for per-point errors.
    double diameter() const { return (hi - lo).norm(); }

    std::vector<Vec> points() const {
        check();
        std::vector<Vec> pts;
        pts.reserve(size());
        std::vector<int> idx(dim(), 0);
        while (true) {
            Vec p(dim());
            for (int d = 0; d < dim(); ++d)
                p[d] = lo[d] + (idx[d] + 0.5) * (hi[d] - lo[d]) / counts[d];
            pts.push_back(p);
            int d = dim() - 1;
            while (d >= 0 && ++idx[d] == counts[d]) idx[d--] = 0;
            if (d < 0) break;
        }
        return pts;
    }

    static Grid box2d(double x_lo, double x_hi, double y_lo, double y_hi, int nx, int ny) {
        Grid g;
        g.lo = Vec(2);
        g.hi = Vec(2);
        g.lo << x_lo, y_lo;
        g.hi << x_hi, y_hi;
        g.counts = {nx, ny};
        return g;
    }
};

// Default evaluation grid for the Duffing system: V = 40, K = 100, so the
// Hausdorff tolerance V / K comes out at 0.4.
inline Grid duffing_grid() { return Grid::box2d(-5.0, 5.0, -2.0, 2.0, 10, 10); }

// Default grid for the Lorenz-like system: 125 points over a box enclosing
// both scrolls.
inline Grid lorenz_like_grid() {
    Grid g;
    g.lo = Vec::Constant(3, -15.0);
    g.hi = Vec::Constant(3, 15.0);
    g.counts = {5, 5, 5};
    return g;
}

}  // namespace dsr
