#pragma once

#include <numeric>

#include "dsr/landscape/loss_spec.hpp"
#include "dsr/rng.hpp"

namespace dsr {

struct RadiusConfig {
    double p_th = 0.05;    // loss threshold fraction above the minimum
    int directions = 200;  // random probes on the r_max sphere
    double r_max = 1.0;
    int bisection_iters = 20;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct RadiusSample {
    std::uint64_t direction_seed = 0;
    double a_th = 1.0;
    double radius = 0.0;
    bool saturated = false;  // the loss never crossed the threshold along this ray
};

struct RadiusReport {
    std::vector<RadiusSample> samples;
    double loss_min = 0.0;
    double threshold = 0.0;
    double mean_radius = 0.0;
    double median_radius = 0.0;
    double log_volume_bound = 0.0;  // Jensen lower bound on log V
};

namespace detail {

inline double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace detail

// Width of the loss valley around theta_min: along each random direction on
// the radius-r_max sphere, bisection finds the smallest a in (0, 1] whose
// loss exceeds loss_min * (1 + p_th); the direction's radius is r_max * a.
// The Jensen inequality turns the mean log radius into a lower bound on the
// log volume of the sub-threshold region.
template <typename LossFn>
RadiusReport minima_radius(const Vec& theta_min, LossFn&& loss_at_params, const RadiusConfig& cfg) {
    require(cfg.p_th >= 0.0, "minima_radius: p_th must be non-negative");
    require(cfg.directions >= 1 && cfg.r_max > 0.0, "minima_radius: bad direction config");
    const int dim = static_cast<int>(theta_min.size());

    RadiusReport report;
    report.loss_min = loss_at_params(theta_min);
    report.threshold = report.loss_min * (1.0 + cfg.p_th);
    report.samples.resize(cfg.directions);

    parallel_for(cfg.directions, cfg.jobs, [&](int d) {
        RadiusSample& sample = report.samples[d];
        sample.direction_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(d));
        Rng rng(sample.direction_seed);
        const Vec direction = cfg.r_max * rng.unit_vec(dim);

        auto loss_at = [&](double a) { return loss_at_params(Vec(theta_min + a * direction)); };
        if (loss_at(1.0) <= report.threshold) {
            sample.a_th = 1.0;
            sample.saturated = true;
        } else {
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < cfg.bisection_iters; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (loss_at(mid) > report.threshold)
                    hi = mid;
                else
                    lo = mid;
            }
            sample.a_th = hi;
        }
        sample.radius = cfg.r_max * sample.a_th;
    });

    std::vector<double> radii;
    radii.reserve(report.samples.size());
    double log_sum = 0.0;
    for (const auto& s : report.samples) {
        radii.push_back(s.radius);
        log_sum += std::log(std::max(s.radius, 1e-300));
    }
    report.mean_radius = std::accumulate(radii.begin(), radii.end(), 0.0) / radii.size();
    report.median_radius = detail::median_of(radii);
    // log V >= (d/2) log pi - log Gamma(d/2 + 1) + (d/N) sum_i log r_i
    report.log_volume_bound = 0.5 * dim * std::log(M_PI) - std::lgamma(0.5 * dim + 1.0) +
                              dim * log_sum / static_cast<double>(report.samples.size());
    return report;
}

inline RadiusReport minima_radius(const ShPLRNN& model, const WindowLoss& loss, const RadiusConfig& cfg) {
    return minima_radius(
        model.flatten(),
        [&](const Vec& theta) {
            ShPLRNN local = model;
            local.unflatten(theta);
            return loss.eval(local);
        },
        cfg);
}

}  // namespace dsr
