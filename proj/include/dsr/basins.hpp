#pragma once

#include <optional>
#include <vector>

#include "dsr/integrate.hpp"

namespace dsr {

inline constexpr int kBasinUnresolved = 0;

struct BasinConfig {
    double t_chunk = 20.0;    // integration time per labeling attempt
    double t_max = 200.0;     // give up after this much time
    int tail_points = 50;     // points checked against the attractor regions
    double tolerance = 0.5;   // proximity radius around a labeled attractor
    IntegratorConfig integrator{};
};

namespace detail {

// Duffing: two stable foci at (+-sqrt(-b/c), 0), basin 1 = positive focus.
inline std::optional<int> duffing_tail_label(const Duffing& s, const Mat& tail, double tol) {
    const double xeq = std::sqrt(-s.b / s.c);
    Vec plus(2), minus(2);
    plus << xeq, 0.0;
    minus << -xeq, 0.0;
    bool near_plus = true, near_minus = true;
    for (int i = 0; i < tail.rows(); ++i) {
        const Vec p = tail.row(i);
        if ((p - plus).norm() > tol) near_plus = false;
        if ((p - minus).norm() > tol) near_minus = false;
    }
    if (near_plus) return 1;
    if (near_minus) return 2;
    return std::nullopt;
}

// Lorenz-like: the two 1-scroll attractors are mirror images under
// (x, y, z) -> (x, -y, -z); the scroll is identified by the sign of the mean
// z coordinate on the limit set.
inline std::optional<int> lorenz_like_tail_label(const Mat& tail) {
    const double mean_z = tail.col(2).mean();
    const double spread = (tail.col(2).array() - mean_z).abs().maxCoeff();
    if (mean_z > 1.0 && mean_z > 0.2 * spread + 1.0) return 1;
    if (mean_z < -1.0 && -mean_z > 0.2 * spread + 1.0) return 2;
    if (mean_z > 1.0) return 1;
    if (mean_z < -1.0) return 2;
    return std::nullopt;
}

}  // namespace detail

class BasinLabeler {
  public:
    BasinLabeler(GroundTruthSystem sys, BasinConfig cfg = {}) : sys_(std::move(sys)), cfg_(cfg) {
        cfg_.integrator.t_int = cfg_.t_chunk;
        if (auto* l96 = std::get_if<Lorenz96>(&sys_)) {
            // Two reference attractors obtained from fixed reference initial
            // conditions; new points are labeled by tail-centroid proximity.
            reference_tails_.push_back(reference_tail(Vec::Constant(l96->dim, l96->forcing * 0.5)));
            Vec alt = Vec::Constant(l96->dim, l96->forcing * 0.5);
            for (int j = 0; j < l96->dim; j += 2) alt[j] = -alt[j];
            reference_tails_.push_back(reference_tail(alt));
        }
    }

    // Returns 1, 2, ... for resolved basins and kBasinUnresolved for points
    // whose orbit never settles near a labeled attractor (the measure-zero
    // remainder of the decomposition).
    int label(const Vec& x0) const {
        Vec x = x0;
        double elapsed = 0.0;
        while (elapsed < cfg_.t_max) {
            Trajectory traj = integrate(sys_, x, cfg_.integrator);
            if (traj.divergent) return kBasinUnresolved;
            elapsed += cfg_.t_chunk;
            const int tail_n = std::min(cfg_.tail_points, traj.length());
            const Mat tail = traj.states.bottomRows(tail_n);
            if (auto lbl = tail_label(tail)) return *lbl;
            x = traj.states.row(traj.length() - 1);
        }
        return kBasinUnresolved;
    }

    std::vector<int> label_all(const std::vector<Vec>& points) const {
        std::vector<int> out(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) out[i] = label(points[i]);
        return out;
    }

    const GroundTruthSystem& system() const { return sys_; }

  private:
    std::optional<int> tail_label(const Mat& tail) const {
        if (const auto* d = std::get_if<Duffing>(&sys_)) return detail::duffing_tail_label(*d, tail, cfg_.tolerance);
        if (std::holds_alternative<LorenzLike>(sys_)) return detail::lorenz_like_tail_label(tail);
        if (std::holds_alternative<Lorenz96>(sys_)) {
            const Vec centroid = tail.colwise().mean();
            double best = cfg_.tolerance;
            int best_id = kBasinUnresolved;
            for (std::size_t i = 0; i < reference_tails_.size(); ++i) {
                const Vec ref_centroid = reference_tails_[i].colwise().mean();
                const double dist = (centroid - ref_centroid).norm();
                if (dist < best) {
                    best = dist;
                    best_id = static_cast<int>(i) + 1;
                }
            }
            if (best_id != kBasinUnresolved) return best_id;
            return std::nullopt;
        }
        throw ValidationError("basin_label: no attractor list known for system " + system_name(sys_));
    }

    Mat reference_tail(const Vec& x0) {
        IntegratorConfig cfg = cfg_.integrator;
        cfg.t_int = cfg_.t_max;
        Trajectory traj = integrate(sys_, x0, cfg);
        const int tail_n = std::min(500, traj.length());
        return traj.states.bottomRows(tail_n);
    }

    GroundTruthSystem sys_;
    BasinConfig cfg_;
    std::vector<Mat> reference_tails_;
};

inline int basin_label(const GroundTruthSystem& sys, const Vec& x0, const BasinConfig& cfg = {}) {
    return BasinLabeler(sys, cfg).label(x0);
}

}  // namespace dsr
