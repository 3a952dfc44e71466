#include "dsr/metrics/wasserstein.hpp"

#include "dsr/flows.hpp"
#include "dsr/metrics/errors.hpp"
#include "dsr/metrics/limit_set.hpp"
#include "dsr/metrics/lyapunov.hpp"
#include "dsr/metrics/report.hpp"
#include "testutil.hpp"

using namespace dsr;

TEST_CASE("w1_1d: hand values", "[wasserstein]") {
    Rng rng(5);
    Vec a = rng.normal_vec(500);
    REQUIRE(w1_1d(a, a) == 0.0);

    // point masses
    Vec pa = Vec::Constant(1, 1.3), pb = Vec::Constant(1, -0.4);
    REQUIRE(w1_1d(pa, pb) == Catch::Approx(1.7).epsilon(1e-12));

    // shifted copy of equal size: the exact shift
    Vec b = a.array() + 0.77;
    REQUIRE(w1_1d(a, b) == Catch::Approx(0.77).epsilon(1e-12));
}

TEST_CASE("w1_1d metric axioms", "[wasserstein]") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        Vec a = rng.normal_vec(64), b = rng.normal_vec(64), c = rng.normal_vec(64);
        const double ab = w1_1d(a, b), ba = w1_1d(b, a), ac = w1_1d(a, c), cb = w1_1d(c, b);
        REQUIRE(ab >= 0.0);
        REQUIRE(ab == ba);
        REQUIRE(ab <= ac + cb + 1e-12);  // quantile vectors make this an L1 metric
    }
    // identity of indiscernibles on equal-size samples
    Vec a = rng.normal_vec(32);
    std::vector<double> shuffled(a.data(), a.data() + 32);
    std::reverse(shuffled.begin(), shuffled.end());
    Vec b = Eigen::Map<Vec>(shuffled.data(), 32);
    REQUIRE(w1_1d(a, b) == 0.0);
}

TEST_CASE("sliced_w1: identity and 1-d equivalence", "[wasserstein]") {
    Rng rng(9);
    Mat cloud = rng.normal_mat(100, 3);
    SlicedW1Config cfg;
    cfg.directions = 50;
    cfg.seed = 3;
    REQUIRE(sliced_w1(cloud, cloud, cfg) == 0.0);

    Mat a1 = rng.normal_mat(40, 1), b1 = rng.normal_mat(60, 1);
    for (int l : {1, 7, 100}) {
        SlicedW1Config c1;
        c1.directions = l;
        c1.seed = l;
        // the mean over L identical per-direction values rounds at 1 ulp
        REQUIRE(sliced_w1(a1, b1, c1) == Catch::Approx(w1_1d(a1.col(0), b1.col(0))).epsilon(1e-15));
    }
}

TEST_CASE("sliced_w1 against a dense direction-grid oracle", "[wasserstein]") {
    // two 2-d point clouds of 3 points each; the oracle averages the projected
    // W1 over 10^4 uniformly spaced angles
    Mat a(3, 2), b(3, 2);
    a << 0.0, 0.0, 1.0, 0.5, -0.3, 0.8;
    b << 0.2, -0.1, 0.9, 1.1, -1.0, 0.4;

    const int n_grid = 10000;
    std::vector<double> vals(n_grid);
    double oracle = 0.0;
    for (int k = 0; k < n_grid; ++k) {
        const double theta = (k + 0.5) * M_PI / n_grid;
        Vec xi(2);
        xi << std::cos(theta), std::sin(theta);
        vals[k] = w1_1d(a * xi, b * xi);
        oracle += vals[k];
    }
    oracle /= n_grid;
    double var = 0.0;
    for (double v : vals) var += (v - oracle) * (v - oracle);
    var /= n_grid;

    SlicedW1Config cfg;
    cfg.directions = 1000;
    cfg.seed = 17;
    const double mc = sliced_w1(a, b, cfg);
    const double se = std::sqrt(var / cfg.directions);
    REQUIRE(std::abs(mc - oracle) <= 2.0 * se + 1e-9);
}

TEST_CASE("sliced_w1 is translation covariant", "[wasserstein]") {
    Rng rng(11);
    Mat a = rng.normal_mat(50, 2), b = rng.normal_mat(70, 2);
    Vec shift(2);
    shift << 3.1, -2.7;
    SlicedW1Config cfg;
    cfg.directions = 64;
    cfg.seed = 4;
    const double base = sliced_w1(a, b, cfg);
    Mat a2 = a.rowwise() + shift.transpose();
    Mat b2 = b.rowwise() + shift.transpose();
    REQUIRE(std::abs(sliced_w1(a2, b2, cfg) - base) < 1e-12);
}

TEST_CASE("sliced_w1 triangle inequality with shared directions", "[wasserstein]") {
    Rng rng(13);
    SlicedW1Config cfg;
    cfg.directions = 32;
    cfg.seed = 21;
    for (int trial = 0; trial < 10; ++trial) {
        Mat a = rng.normal_mat(30, 2), b = rng.normal_mat(30, 2), c = rng.normal_mat(30, 2);
        REQUIRE(sliced_w1(a, b, cfg) <= sliced_w1(a, c, cfg) + sliced_w1(c, b, cfg) + 1e-12);
    }
}

TEST_CASE("lyapunov: linear diagonal system", "[lyapunov]") {
    Mat a(2, 2);
    a << -1.0, 0.0, 0.0, -2.0;
    SystemFlow flow(LinearSystem{a}, 0.01);
    LyapunovConfig cfg;
    cfg.transient_steps = 100;
    cfg.eval_steps = 3000;
    Vec x0(2);
    x0 << 1.0, 1.0;
    Vec lam = flow.lyapunov(x0, cfg);
    REQUIRE(lam[0] == Catch::Approx(-2.0).margin(1e-3));
    REQUIRE(lam[1] == Catch::Approx(-1.0).margin(1e-3));
}

TEST_CASE("lyapunov: scalar doubling map", "[lyapunov]") {
    LyapunovConfig cfg;
    cfg.transient_steps = 0;
    cfg.eval_steps = 500;
    cfg.reorth_every = 10;
    Vec z0 = Vec::Constant(1, 1e-9);
    bool diverged = false;
    Vec lam = lyapunov_spectrum_map(
        z0, 1, 1.0, cfg, [](const Vec& z) { return Vec(0.5 * z); },  // contract the state, expand the tangent
        [](const Vec&, Mat& v) { v *= 2.0; }, &diverged);
    REQUIRE_FALSE(diverged);
    REQUIRE(lam[0] == Catch::Approx(std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("lyapunov: stable equilibrium has negative spectrum", "[lyapunov]") {
    SystemFlow flow(Duffing{}, 0.01);
    LyapunovConfig cfg;
    cfg.transient_steps = 3000;
    cfg.eval_steps = 3000;
    Vec x0(2);
    x0 << 3.0, 0.5;
    Vec lam = flow.lyapunov(x0, cfg);
    REQUIRE(lam.maxCoeff() < 0.0);
    // the focus at sqrt(10) has eigenvalues -0.25 +- 1.39i
    REQUIRE(lam[1] == Catch::Approx(-0.25).margin(0.02));
}

TEST_CASE("lyapunov: volume-preserving linear map has zero sum", "[lyapunov]") {
    const double theta = 0.7;
    Mat rot(2, 2), scale(2, 2);
    rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    scale << 2.0, 0.0, 0.0, 0.5;
    Mat map = rot * scale * rot.transpose();  // det = 1
    LyapunovConfig cfg;
    cfg.transient_steps = 0;
    cfg.eval_steps = 2000;
    cfg.reorth_every = 5;  // the 2x/0.5x map conditions the tangent block fast
    cfg.divergence_bound = 1e100;
    bool diverged = false;
    Vec lam = lyapunov_spectrum_map(
        Vec::Zero(2), 2, 1.0, cfg, [&](const Vec& z) { return Vec(0.0 * z); },
        [&](const Vec&, Mat& v) { v = map * v; }, &diverged);
    REQUIRE(std::abs(lam.sum()) < 1e-6);
}

TEST_CASE("lyapunov: lorenz-like attractor and reorth stability", "[lyapunov][slow]") {
    SystemFlow flow(LorenzLike{}, 0.005);
    Vec x0(3);
    x0 << 6.0, 4.0, 7.0;  // near the upper scroll
    LyapunovConfig cfg;
    cfg.transient_steps = 5000;
    cfg.eval_steps = 10000;
    cfg.reorth_every = 50;
    Vec lam50 = flow.lyapunov(x0, cfg);
    REQUIRE(lam50[2] > 0.05);  // chaotic scroll

    cfg.reorth_every = 25;
    Vec lam25 = flow.lyapunov(x0, cfg);
    const double scale = lam50.cwiseAbs().maxCoeff();
    for (int i = 0; i < 3; ++i) REQUIRE(std::abs(lam50[i] - lam25[i]) < 0.05 * scale);
}

TEST_CASE("limit sets: equilibrium, cycle, divergence", "[limitset]") {
    SystemFlow duffing(Duffing{}, 0.01);
    Vec x0(2);
    x0 << 3.0, 0.5;
    auto tail = duffing.limit_tail(x0, 12000, 500);
    REQUIRE_FALSE(tail.divergent);
    Vec focus(2);
    focus << std::sqrt(10.0), 0.0;
    for (int i = 0; i < tail.points.rows(); ++i)
        REQUIRE((tail.points.row(i).transpose() - focus).norm() < 1e-4);

    SystemFlow vdp(VanDerPol{}, 0.01);
    Vec v0(2);
    v0 << 2.0, 0.0;
    auto cycle = vdp.limit_tail(v0, 3000, 800);  // 8 time units > one period
    REQUIRE_FALSE(cycle.divergent);
    double max_gap = 0.0;
    for (int i = 0; i < cycle.points.rows(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (int j = 0; j < cycle.points.rows(); ++j) {
            if (i == j) continue;
            nearest = std::min(nearest, (cycle.points.row(i) - cycle.points.row(j)).norm());
        }
        max_gap = std::max(max_gap, nearest);
    }
    REQUIRE(max_gap < 0.1);

    SystemFlow growth(LinearSystem{Mat::Identity(1, 1)}, 0.01);
    auto div = growth.limit_tail(Vec::Ones(1), 3000, 100);
    REQUIRE(div.divergent);
    REQUIRE(div.points.rows() == 0);
}

TEST_CASE("hausdorff distance", "[limitset]") {
    Rng rng(31);
    Mat x = rng.normal_mat(40, 2);
    REQUIRE(hausdorff(x, x) == 0.0);

    Mat a(1, 1), b(2, 1);
    a << 0.0;
    b << 0.0, 3.0;
    REQUIRE(hausdorff(a, b) == 3.0);

    for (int trial = 0; trial < 10; ++trial) {
        Mat u = rng.normal_mat(20, 3), v = rng.normal_mat(15, 3);
        REQUIRE(hausdorff(u, v) == hausdorff(v, u));
        REQUIRE(hausdorff(u, v) >= 0.0);
    }
    REQUIRE_THROWS_AS(hausdorff(Mat(0, 2), x), ValidationError);
}

TEST_CASE("shannon entropy over a box histogram", "[limitset]") {
    Vec lo = Vec::Constant(2, -1.0), hi = Vec::Constant(2, 1.0);

    Mat single = Mat::Zero(100, 2);  // one cell occupied
    REQUIRE(shannon_entropy_box(single, lo, hi, 8) == 0.0);

    // uniform occupancy of all 8x8 cells
    Mat uniform(64, 2);
    int row = 0;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            uniform(row, 0) = -1.0 + (i + 0.5) * 0.25;
            uniform(row, 1) = -1.0 + (j + 0.5) * 0.25;
            ++row;
        }
    REQUIRE(shannon_entropy_box(uniform, lo, hi, 8) == Catch::Approx(std::log(64.0)).epsilon(1e-12));

    // two equally visited cells
    Mat pair(10, 2);
    for (int i = 0; i < 10; ++i) {
        pair(i, 0) = i % 2 == 0 ? -0.6 : 0.6;
        pair(i, 1) = 0.0;
    }
    REQUIRE(shannon_entropy_box(pair, lo, hi, 8) == Catch::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("ecdf basics", "[limitset]") {
    Ecdf single = ecdf({2.5});
    REQUIRE(single.values == std::vector<double>{2.5});
    REQUIRE(single.fractions == std::vector<double>{1.0});
    REQUIRE(single.at(2.4) == 0.0);
    REQUIRE(single.at(2.5) == 1.0);

    Ecdf three = ecdf({3.0, 1.0, 2.0});
    REQUIRE(three.values == std::vector<double>{1.0, 2.0, 3.0});
    REQUIRE(three.fractions[0] == Catch::Approx(1.0 / 3.0));
    REQUIRE(three.fractions[1] == Catch::Approx(2.0 / 3.0));
    REQUIRE(three.fractions[2] == 1.0);
    REQUIRE(three.at(std::numeric_limits<double>::infinity()) == 1.0);

    REQUIRE_THROWS_AS(ecdf({}), ValidationError);
}

TEST_CASE("e_stat and e_top vanish for a flow against itself", "[errors]") {
    SystemFlow truth(Duffing{}, 0.01);
    Grid grid = Grid::box2d(-5.0, 5.0, -2.0, 2.0, 3, 3);

    EStatConfig stat_cfg;
    stat_cfg.horizon_steps = 500;
    stat_cfg.sw1.directions = 32;
    stat_cfg.jobs = 2;
    EStatResult stat = e_stat(truth, truth, grid, stat_cfg);
    REQUIRE(stat.aggregate == 0.0);

    TopoConfig topo_cfg;
    topo_cfg.lyapunov.transient_steps = 1500;
    topo_cfg.lyapunov.eval_steps = 1000;
    topo_cfg.tail_steps = 200;
    topo_cfg.eps_dh = 0.4;
    topo_cfg.jobs = 2;
    TopoResult topo = e_top(truth, truth, grid.points(), topo_cfg);
    REQUIRE(topo.e_top == 0.0);
}

TEST_CASE("library model of the true duffing field evaluates clean", "[errors]") {
    FunctionLibrary lib = polynomial_library(2, 3);
    LibraryModel model{lib, Mat::Zero(lib.size(), 2)};
    auto names = lib.names();
    auto idx = [&](const std::string& n) {
        return static_cast<int>(std::find(names.begin(), names.end(), n) - names.begin());
    };
    model.Xi(idx("y"), 0) = 1.0;
    model.Xi(idx("x"), 1) = 1.0;
    model.Xi(idx("y"), 1) = -0.5;
    model.Xi(idx("x^3"), 1) = -0.1;

    SystemFlow truth(Duffing{}, 0.01);
    LibraryFlow recon(model, 0.01);
    Grid grid = Grid::box2d(-5.0, 5.0, -2.0, 2.0, 3, 3);

    EStatConfig stat_cfg;
    stat_cfg.horizon_steps = 1000;
    stat_cfg.sw1.directions = 100;
    stat_cfg.jobs = 2;
    EStatResult stat = e_stat(truth, recon, grid, stat_cfg);
    REQUIRE(stat.aggregate < 1e-3);

    TopoConfig topo_cfg;
    topo_cfg.lyapunov.transient_steps = 2000;
    topo_cfg.lyapunov.eval_steps = 1000;
    topo_cfg.tail_steps = 200;
    topo_cfg.eps_dh = 0.4;
    topo_cfg.jobs = 2;
    TopoResult topo = e_top(truth, recon, grid.points(), topo_cfg);
    REQUIRE(topo.e_top == 0.0);
}

TEST_CASE("divergent model flows take the penalty and fail the indicator", "[errors]") {
    SystemFlow truth(Duffing{}, 0.01);
    // a linear model that blows up from every grid point
    LibraryModel runaway{polynomial_library(2, 1), Mat::Zero(3, 2)};
    runaway.Xi(1, 0) = 3.0;  // x' = 3x
    runaway.Xi(2, 1) = 3.0;  // y' = 3y
    LibraryFlow model(runaway, 0.01);
    Grid grid = Grid::box2d(1.0, 5.0, -2.0, 2.0, 2, 2);

    EStatConfig stat_cfg;
    stat_cfg.horizon_steps = 600;
    stat_cfg.sw1.directions = 8;
    EStatResult stat = e_stat(truth, model, grid, stat_cfg);
    for (std::size_t i = 0; i < stat.divergent.size(); ++i) {
        REQUIRE(stat.divergent[i]);
        REQUIRE(stat.per_point[static_cast<int>(i)] == Catch::Approx(grid.diameter()));
    }

    TopoConfig topo_cfg;
    topo_cfg.lyapunov.transient_steps = 500;
    topo_cfg.lyapunov.eval_steps = 500;
    topo_cfg.tail_steps = 100;
    topo_cfg.eps_dh = 0.4;
    TopoResult topo = e_top(truth, model, grid.points(), topo_cfg);
    REQUIRE(topo.e_top == 1.0);
}

TEST_CASE("metric report aggregates by basin", "[errors]") {
    SystemFlow truth(Duffing{}, 0.01);
    Grid grid = Grid::box2d(-5.0, 5.0, -2.0, 2.0, 4, 2);
    BasinLabeler labeler(Duffing{});
    std::vector<int> basins = labeler.label_all(grid.points());

    EStatConfig stat_cfg;
    stat_cfg.horizon_steps = 400;
    stat_cfg.sw1.directions = 16;
    stat_cfg.jobs = 2;
    TopoConfig topo_cfg;
    topo_cfg.lyapunov.transient_steps = 1500;
    topo_cfg.lyapunov.eval_steps = 800;
    topo_cfg.tail_steps = 150;
    topo_cfg.jobs = 2;

    MetricReport report = evaluate_model(truth, truth, grid, basins, stat_cfg, topo_cfg);
    REQUIRE(report.e_stat_total == 0.0);
    REQUIRE(report.e_top_total == 0.0);
    REQUIRE(report.e_stat_by_basin.size() == 2);
    REQUIRE(report.e_stat_on(1) == 0.0);
    REQUIRE(report.e_top_on(2) == 0.0);

    auto j = report.to_json();
    REQUIRE(j["e_stat"] == 0.0);
    REQUIRE(j["grid_size"] == 8);
}
