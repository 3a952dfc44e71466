#include "dsr/systems.hpp"

#include "dsr/basins.hpp"
#include "dsr/grid.hpp"
#include "testutil.hpp"

using namespace dsr;

TEST_CASE("duffing vector field values", "[systems]") {
    Duffing duffing{};
    GroundTruthSystem sys = duffing;

    Vec origin = Vec::Zero(2);
    REQUIRE(eval_vf(sys, origin).norm() == 0.0);

    Vec x(2);
    x << 1.0, 0.0;
    Vec dx = eval_vf(sys, x);
    REQUIRE(dx[0] == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(dx[1] == Catch::Approx(0.9).margin(1e-15));  // -1*(-1 + 0.1*1)

    // off-origin equilibria at x = +-sqrt(10)
    const double xeq = std::sqrt(10.0);
    for (double sign : {1.0, -1.0}) {
        Vec eq(2);
        eq << sign * xeq, 0.0;
        REQUIRE(eval_vf(sys, eq).norm() < 1e-14);
    }
}

TEST_CASE("duffing field is odd", "[systems]") {
    GroundTruthSystem sys = Duffing{};
    Rng rng(61);
    for (int i = 0; i < 50; ++i) {
        Vec x = rng.uniform_vec(2, -5.0, 5.0);
        REQUIRE((eval_vf(sys, x) + eval_vf(sys, Vec(-x))).norm() < 1e-12);
    }
}

TEST_CASE("jacobians: hand values", "[systems]") {
    GroundTruthSystem duffing = Duffing{};
    Mat j = jacobian_vf(duffing, Vec::Zero(2));
    Mat expected(2, 2);
    expected << 0.0, 1.0, 1.0, -0.5;
    REQUIRE((j - expected).norm() < 1e-15);

    Mat a = Mat::Random(3, 3);
    GroundTruthSystem lin = LinearSystem{a};
    REQUIRE((jacobian_vf(lin, Vec::Random(3)) - a).norm() == 0.0);
}

TEST_CASE("jacobians match central finite differences on all systems", "[systems]") {
    std::vector<GroundTruthSystem> systems = {
        Duffing{}, LorenzLike{}, Lorenz96{}, TwoCycleVF{}, TrigVF{}, VanDerPol{}, HarmonicOscillator{},
        LinearSystem{Mat::Random(4, 4)}};
    Rng rng(7);
    for (const auto& sys : systems) {
        const int n = system_dim(sys);
        auto f = [&](const Vec& x) { return eval_vf(sys, x); };
        for (int i = 0; i < 100; ++i) {
            Vec x = rng.uniform_vec(n, -2.0, 2.0);
            Mat analytic = jacobian_vf(sys, x);
            Mat numeric = testutil::fd_jacobian(f, x);
            REQUIRE(testutil::rel_err(numeric, analytic) < 1e-5);
        }
    }
}

TEST_CASE("two-cycle field restricted to the unit circle is a rotation", "[systems]") {
    GroundTruthSystem sys = TwoCycleVF{};
    for (double theta : {0.1, 1.2, 2.9, 4.4, 6.0}) {
        Vec x(2);
        x << std::cos(theta), std::sin(theta);
        Vec dx = eval_vf(sys, x);
        REQUIRE(dx[0] == Catch::Approx(2.0 * x[1]).margin(1e-12));
        REQUIRE(dx[1] == Catch::Approx(-2.0 * x[0]).margin(1e-12));
    }
}

TEST_CASE("dimension mismatch raises", "[systems]") {
    GroundTruthSystem sys = Duffing{};
    REQUIRE_THROWS_AS(eval_vf(sys, Vec::Zero(3)), ValidationError);
    REQUIRE_THROWS_AS(jacobian_vf(sys, Vec::Zero(1)), ValidationError);
}

TEST_CASE("duffing basin labels", "[basins]") {
    GroundTruthSystem sys = Duffing{};
    BasinConfig cfg;

    Vec right(2), left(2), saddle(2);
    right << 3.0, 0.0;
    left << -3.0, 0.0;
    saddle << 0.0, 0.0;
    REQUIRE(basin_label(sys, right, cfg) == 1);
    REQUIRE(basin_label(sys, left, cfg) == 2);
    REQUIRE(basin_label(sys, saddle, cfg) == kBasinUnresolved);
}

TEST_CASE("duffing basin labels respect the odd symmetry", "[basins]") {
    GroundTruthSystem sys = Duffing{};
    BasinLabeler labeler(sys);
    Rng rng(11);
    for (int i = 0; i < 10; ++i) {
        Vec x(2);
        x << rng.uniform(-4.0, 4.0), rng.uniform(-1.5, 1.5);
        const int a = labeler.label(x);
        const int b = labeler.label(Vec(-x));
        if (a == kBasinUnresolved) {
            REQUIRE(b == kBasinUnresolved);
        } else {
            REQUIRE(a + b == 3);  // labels 1 and 2 swap under negation
        }
    }
}

TEST_CASE("lorenz96 smoke: bounded orbits and sane labels", "[basins][slow]") {
    // at F = 0.654502 the standard field is monostable; the labeler must
    // still resolve points near the homogeneous fixed point without diverging
    GroundTruthSystem sys = Lorenz96{};
    IntegratorConfig cfg;
    cfg.t_int = 50.0;
    cfg.dt = 0.01;
    cfg.record_interval = 0.01;
    Rng rng(5);
    BasinLabeler labeler(sys);
    for (int trial = 0; trial < 4; ++trial) {
        Vec x0 = rng.uniform_vec(6, -1.0, 2.0);
        Trajectory traj = integrate(sys, x0, cfg);
        REQUIRE_FALSE(traj.divergent);
        REQUIRE(traj.states.cwiseAbs().maxCoeff() < 100.0);
        const int label = labeler.label(x0);
        REQUIRE(label >= kBasinUnresolved);
        REQUIRE(label <= 2);
    }
    // the homogeneous fixed point x_j = F is an equilibrium
    Vec fixed = Vec::Constant(6, 0.654502);
    REQUIRE(eval_vf(sys, fixed).norm() < 1e-12);
}

TEST_CASE("lorenz-like basin labels split by scroll", "[basins][slow]") {
    GroundTruthSystem sys = LorenzLike{};
    BasinConfig cfg;
    cfg.t_chunk = 40.0;
    cfg.t_max = 120.0;
    cfg.integrator.dt = 0.005;
    cfg.integrator.record_interval = 0.005;
    BasinLabeler labeler(sys, cfg);
    Vec up(3), down(3);
    up << 6.3, 4.8, 7.6;    // near the upper-scroll equilibrium
    down << 6.3, -4.8, -7.6;
    const int label_up = labeler.label(up);
    const int label_down = labeler.label(down);
    REQUIRE(label_up == 1);
    REQUIRE(label_down == 2);
}

TEST_CASE("grid geometry", "[grid]") {
    Grid g = duffing_grid();
    REQUIRE(g.size() == 100);
    REQUIRE(g.volume() == Catch::Approx(40.0));
    auto pts = g.points();
    REQUIRE(pts.size() == 100);
    // cell centers: first point at lo + half cell
    REQUIRE(pts[0][0] == Catch::Approx(-4.5));
    REQUIRE(pts[0][1] == Catch::Approx(-1.8));
    // symmetric under negation
    for (const auto& p : pts) {
        bool found = false;
        for (const auto& q : pts)
            if ((p + q).norm() < 1e-12) found = true;
        REQUIRE(found);
    }
}
