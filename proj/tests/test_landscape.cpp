#include "dsr/landscape/entropy_sweep.hpp"

#include "dsr/landscape/hessian.hpp"
#include "dsr/landscape/radius.hpp"
#include "dsr/landscape/retrain.hpp"
#include "testutil.hpp"

using namespace dsr;

TEST_CASE("hessian of an isotropic quadratic", "[hessian]") {
    // loss = |theta|^2, gradient = 2 theta, hessian = 2I
    const int dim = 12;
    Vec theta = Vec::Random(dim);
    HessianConfig cfg;
    auto grad = [](const Vec& t) { return Vec(2.0 * t); };
    HessianReport report = hessian_eig_counts(theta, grad, cfg);
    REQUIRE(report.positive == dim);
    REQUIRE(report.zero == 0);
    REQUIRE(report.negative == 0);
    REQUIRE(report.lambda_max == Catch::Approx(2.0).margin(1e-8));
    REQUIRE(report.lambda_min == Catch::Approx(2.0).margin(1e-8));
    REQUIRE(report.symmetry_residual < 1e-3 * std::abs(report.lambda_max));
    REQUIRE(report.total() == dim);
}

TEST_CASE("hessian of a saddle counts signs", "[hessian]") {
    // loss = x^2 - y^2 + 0 * z
    Vec theta = Vec::Zero(3);
    auto grad = [](const Vec& t) {
        Vec g(3);
        g << 2.0 * t[0], -2.0 * t[1], 0.0;
        return g;
    };
    HessianReport report = hessian_eig_counts(theta, grad, HessianConfig{});
    REQUIRE(report.positive == 1);
    REQUIRE(report.negative == 1);
    REQUIRE(report.zero == 1);
}

TEST_CASE("hessian report is identical across worker counts", "[hessian]") {
    ShPLRNN model = init_shplrnn(3, 10, 2, InitConfig{}, 5);
    Rng rng(5);
    std::vector<Mat> data = {rng.normal_mat(60, 2)};
    WindowLoss loss = WindowLoss::from_trajectories(data, 20, 5);
    HessianConfig cfg1, cfg2;
    cfg1.jobs = 1;
    cfg2.jobs = 2;
    HessianReport a = hessian_eig_counts(model, loss, cfg1);
    HessianReport b = hessian_eig_counts(model, loss, cfg2);
    REQUIRE(a.total() == model.parameter_count());
    REQUIRE((a.eigenvalues - b.eigenvalues).norm() == 0.0);
    REQUIRE(a.positive == b.positive);
    REQUIRE(a.zero == b.zero);
}

TEST_CASE("hessian refuses above the parameter cap", "[hessian]") {
    HessianConfig cfg;
    cfg.parameter_cap = 5;
    auto grad = [](const Vec& t) { return t; };
    REQUIRE_THROWS_AS(hessian_eig_counts(Vec::Zero(10), grad, cfg), ValidationError);
}

TEST_CASE("minima radius on the isotropic quadratic", "[radius]") {
    // loss = 1 + |theta|^2, p_th = 0.05: crossing at |theta| = sqrt(0.05)
    const int dim = 30;
    auto loss = [](const Vec& t) { return 1.0 + t.squaredNorm(); };
    RadiusConfig cfg;
    cfg.directions = 64;
    cfg.r_max = 1.0;
    cfg.bisection_iters = 30;
    cfg.seed = 9;
    RadiusReport report = minima_radius(Vec::Zero(dim), loss, cfg);
    const double expected = std::sqrt(0.05);
    double lo = 1e9, hi = 0.0;
    for (const auto& s : report.samples) {
        REQUIRE_FALSE(s.saturated);
        REQUIRE(s.radius == Catch::Approx(expected).margin(1e-4));
        lo = std::min(lo, s.radius);
        hi = std::max(hi, s.radius);
    }
    REQUIRE(hi - lo < 1e-6);  // isotropic: zero spread up to bisection tolerance
    REQUIRE(report.mean_radius == Catch::Approx(expected).margin(1e-4));
}

TEST_CASE("minima radius: p_th = 0 gives zero radius on ascending rays", "[radius]") {
    auto loss = [](const Vec& t) { return 1.0 + t.squaredNorm(); };
    RadiusConfig cfg;
    cfg.p_th = 0.0;
    cfg.directions = 16;
    cfg.bisection_iters = 30;
    RadiusReport report = minima_radius(Vec::Zero(8), loss, cfg);
    for (const auto& s : report.samples) REQUIRE(s.radius < 1e-6);
}

TEST_CASE("minima radius: flat loss saturates", "[radius]") {
    auto loss = [](const Vec&) { return 2.0; };
    RadiusConfig cfg;
    cfg.directions = 8;
    RadiusReport report = minima_radius(Vec::Zero(4), loss, cfg);
    for (const auto& s : report.samples) {
        REQUIRE(s.saturated);
        REQUIRE(s.a_th == 1.0);
    }
}

TEST_CASE("minima radius report is order invariant", "[radius]") {
    auto loss = [](const Vec& t) { return 1.0 + t.squaredNorm() + 0.3 * t[0] * t[0]; };
    RadiusConfig cfg1, cfg2;
    cfg1.directions = cfg2.directions = 32;
    cfg1.seed = cfg2.seed = 4;
    cfg1.jobs = 1;
    cfg2.jobs = 2;
    RadiusReport a = minima_radius(Vec::Zero(6), loss, cfg1);
    RadiusReport b = minima_radius(Vec::Zero(6), loss, cfg2);
    for (int d = 0; d < 32; ++d) REQUIRE(a.samples[d].radius == b.samples[d].radius);
    REQUIRE(a.log_volume_bound == b.log_volume_bound);
}

TEST_CASE("entropy sweep at gain zero is exactly zero", "[entropy]") {
    EntropySweepConfig cfg;
    cfg.gains = {0.0};
    cfg.models_per_gain = 4;
    cfg.hidden_dim = 20;
    cfg.transient_steps = 500;
    cfg.tail_steps = 50;
    cfg.seed = 3;
    Grid grid = Grid::box2d(-5.0, 5.0, -5.0, 5.0, 5, 5);
    GainSweepResult result = entropy_gain_sweep(cfg, grid);
    for (double h : result.entropies[0]) REQUIRE(h == 0.0);
    REQUIRE(result.mean_entropy[0] == 0.0);
}

TEST_CASE("entropy sweep is schedule invariant", "[entropy]") {
    EntropySweepConfig cfg;
    cfg.gains = {0.5, 1.5};
    cfg.models_per_gain = 3;
    cfg.hidden_dim = 16;
    cfg.transient_steps = 300;
    cfg.tail_steps = 40;
    cfg.seed = 11;
    Grid grid = Grid::box2d(-4.0, 4.0, -4.0, 4.0, 4, 4);
    cfg.jobs = 1;
    GainSweepResult a = entropy_gain_sweep(cfg, grid);
    cfg.jobs = 2;
    GainSweepResult b = entropy_gain_sweep(cfg, grid);
    for (std::size_t g = 0; g < a.entropies.size(); ++g)
        for (std::size_t k = 0; k < a.entropies[g].size(); ++k)
            REQUIRE(a.entropies[g][k] == b.entropies[g][k]);
}

TEST_CASE("spearman rank correlation", "[entropy]") {
    REQUIRE(spearman_correlation({1, 2, 3, 4}, {10, 20, 30, 40}) == 1.0);
    REQUIRE(spearman_correlation({1, 2, 3, 4}, {8, 6, 4, 2}) == -1.0);
    // monotone in rank even when nonlinear in value
    REQUIRE(spearman_correlation({1, 2, 3, 4, 5}, {1, 8, 27, 64, 125}) == 1.0);
    const double with_tie = spearman_correlation({1, 2, 3, 4}, {5, 5, 7, 9});
    REQUIRE(with_tie > 0.9);
    REQUIRE_THROWS_AS(spearman_correlation({1, 2}, {3, 3}), ValidationError);
}

TEST_CASE("learnability harness records failures", "[learnability]") {
    auto run = [](int i) -> std::pair<double, double> {
        if (i == 2) throw NumericalError("simulated failed run");
        return {0.1 * (i + 1), 0.05 * (i + 1)};
    };
    LearnabilityResult result = learnability_ecdf(5, 2, run);
    REQUIRE(result.failed_runs == std::vector<int>{2});
    REQUIRE(result.e_stat_values.size() == 4);
    Ecdf e = result.e_stat_ecdf();
    REQUIRE(e.fractions.back() == 1.0);
    REQUIRE(e.values.front() == Catch::Approx(0.1));
}

TEST_CASE("retrain harness reports per-basin errors", "[retrain][slow]") {
    // miniature version of the unlearning probe: quickly train a small model
    // on both basins, retrain on one, and check the report plumbing
    GroundTruthSystem sys = Duffing{};
    IntegratorConfig icfg;
    icfg.t_int = 40.0;
    icfg.dt = 0.01;
    icfg.record_interval = 0.01;
    Vec a(2), b(2);
    a << 3.0, 0.5;
    b << -3.0, -0.5;
    Dataset ds = generate_dataset(sys, {a, b}, icfg);

    ShPLRNN init = init_shplrnn(4, 32, 2, InitConfig{InitScheme::GlorotUniform, 0.3}, 17);
    TrainConfig tcfg;
    tcfg.steps = 1200;
    tcfg.batch_size = 8;
    tcfg.seq_len = 50;
    tcfg.tf_interval = 15;
    tcfg.seed = 17;
    auto trained = train_shplrnn(init, ds.standardized, tcfg);

    SystemFlow truth(sys, 0.01);
    Grid grid = Grid::box2d(-5.0, 5.0, -2.0, 2.0, 3, 2);
    BasinLabeler labeler(sys);
    std::vector<int> basins = labeler.label_all(grid.points());

    EStatConfig stat_cfg;
    stat_cfg.horizon_steps = 500;
    stat_cfg.sw1.directions = 32;
    stat_cfg.jobs = 2;
    TrainConfig retrain_cfg = tcfg;
    retrain_cfg.steps = 400;
    RetrainReport report = retrain_unlearning(trained.model, ds.stats, truth, grid, basins,
                                              {ds.standardized[0]}, retrain_cfg, stat_cfg);
    REQUIRE(report.e_stat_before.count(1) == 1);
    REQUIRE(report.e_stat_before.count(2) == 1);
    REQUIRE(report.e_stat_after.count(1) == 1);
    REQUIRE(report.e_stat_after.count(2) == 1);
    REQUIRE(report.e_stat_before.at(1) >= 0.0);
    REQUIRE(report.loss.loss.size() > 0);
    REQUIRE(report.fold_change(2) > 0.0);
}
