#include "dsr/integrate.hpp"

#include "dsr/dataset.hpp"
#include "testutil.hpp"

using namespace dsr;

namespace {

struct ExpDecay {
    int dim() const { return 1; }
    Vec vf(const Vec& x) const { return -x; }
};

struct ExpGrowth {
    int dim() const { return 1; }
    Vec vf(const Vec& x) const { return x; }
};

}  // namespace

TEST_CASE("exponential decay against closed form", "[integrate]") {
    Vec x0 = Vec::Ones(1);

    IntegratorConfig rk4;
    rk4.method = IntegratorMethod::Rk4;
    rk4.dt = 0.01;
    rk4.t_int = 1.0;
    rk4.record_interval = 0.01;
    Trajectory t1 = integrate(ExpDecay{}, x0, rk4);
    REQUIRE(std::abs(t1.states(t1.length() - 1, 0) - std::exp(-1.0)) < 1e-6);

    IntegratorConfig rk45;
    rk45.method = IntegratorMethod::Rk45;
    rk45.t_int = 1.0;
    rk45.record_interval = 0.1;
    Trajectory t2 = integrate(ExpDecay{}, x0, rk45);
    REQUIRE(std::abs(t2.states(t2.length() - 1, 0) - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("rk4 global error scales as dt^4", "[integrate]") {
    // On x' = x the error at t = 1 should shrink ~16x when dt is halved.
    auto err_at = [](double dt) {
        IntegratorConfig cfg;
        cfg.dt = dt;
        cfg.record_interval = dt;
        cfg.t_int = 1.0;
        Trajectory t = integrate(ExpGrowth{}, Vec::Ones(1), cfg);
        return std::abs(t.states(t.length() - 1, 0) - std::exp(1.0));
    };
    const double ratio = err_at(0.02) / err_at(0.01);
    REQUIRE(ratio > 12.0);
    REQUIRE(ratio < 20.0);
}

TEST_CASE("duffing converges to the off-origin equilibria", "[integrate]") {
    GroundTruthSystem sys = Duffing{};
    IntegratorConfig cfg;
    cfg.t_int = 200.0;
    cfg.record_interval = 0.1;
    cfg.dt = 0.01;
    const double xeq = std::sqrt(10.0);

    Vec a(2), b(2);
    a << 3.0, 0.0;
    b << -1.0, -0.5;
    Trajectory ta = integrate(sys, a, cfg);
    Vec final_a = ta.states.row(ta.length() - 1);
    REQUIRE(std::abs(final_a[0] - xeq) < 1e-3);
    REQUIRE(std::abs(final_a[1]) < 1e-3);

    Trajectory tb = integrate(sys, b, cfg);
    Vec final_b = tb.states.row(tb.length() - 1);
    REQUIRE(std::abs(std::abs(final_b[0]) - xeq) < 1e-3);
}

TEST_CASE("divergence is flagged, not fatal", "[integrate]") {
    IntegratorConfig cfg;
    cfg.dt = 0.01;
    cfg.record_interval = 0.01;
    cfg.t_int = 30.0;
    Trajectory t = integrate(ExpGrowth{}, Vec::Ones(1), cfg);
    REQUIRE(t.divergent);
    REQUIRE(t.length() < cfg.record_count() + 1);
    REQUIRE(t.states.allFinite());
}

TEST_CASE("adaptive and fixed step agree on duffing", "[integrate]") {
    GroundTruthSystem sys = Duffing{};
    Vec x0(2);
    x0 << 2.0, 1.0;

    IntegratorConfig rk4;
    rk4.t_int = 10.0;
    rk4.dt = 0.005;
    rk4.record_interval = 0.1;
    IntegratorConfig rk45 = rk4;
    rk45.method = IntegratorMethod::Rk45;

    Trajectory a = integrate(sys, x0, rk4);
    Trajectory b = integrate(sys, x0, rk45);
    REQUIRE(a.length() == b.length());
    REQUIRE((a.states - b.states).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("duffing dataset shape and standardization", "[dataset]") {
    GroundTruthSystem sys = Duffing{};
    IntegratorConfig cfg;
    cfg.t_int = 40.0;
    cfg.dt = 0.01;
    cfg.record_interval = 0.01;

    std::vector<Vec> ics;
    Vec ic(2);
    ic << 3.0, 0.5;
    ics.push_back(ic);
    ic << 2.0, -0.5;
    ics.push_back(ic);

    Dataset ds = generate_dataset(sys, ics, cfg);
    REQUIRE(ds.raw.size() == 2);
    REQUIRE(ds.raw[0].states.rows() == 4000);
    REQUIRE(ds.raw[0].states.cols() == 2);
    REQUIRE(ds.excluded.empty());

    // standardized copy has overall zero mean / unit variance
    double sum = 0.0, sum_sq = 0.0;
    long count = 0;
    for (const auto& m : ds.standardized) {
        sum += m.sum();
        sum_sq += m.array().square().sum();
        count += m.size();
    }
    REQUIRE(std::abs(sum / count) < 1e-12);
    REQUIRE(sum_sq / count == Catch::Approx(1.0).epsilon(1e-10));

    // destandardize round trip
    Mat round_trip = ds.stats.destandardize(ds.standardized[0]);
    REQUIRE((round_trip - ds.raw[0].states).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constant system rejects standardization", "[dataset]") {
    GroundTruthSystem sys = LinearSystem{Mat::Zero(2, 2)};
    IntegratorConfig cfg;
    cfg.t_int = 1.0;
    cfg.dt = 0.01;
    cfg.record_interval = 0.01;
    std::vector<Vec> ics = {Vec::Ones(2)};
    REQUIRE_THROWS_AS(generate_dataset(sys, ics, cfg), NumericalError);
}

TEST_CASE("divergent trajectories are excluded and reported", "[dataset]") {
    Mat a = Mat::Identity(1, 1);  // x' = x diverges
    GroundTruthSystem growth = LinearSystem{a};
    IntegratorConfig cfg;
    cfg.t_int = 20.0;
    cfg.dt = 0.01;
    cfg.record_interval = 0.01;
    std::vector<Vec> ics = {Vec::Ones(1), Vec::Constant(1, 1e-4)};
    Dataset ds = generate_dataset(GroundTruthSystem{growth}, ics, cfg);
    REQUIRE(ds.excluded == std::vector<int>{0});
    REQUIRE(ds.raw.size() == 1);
}

TEST_CASE("lorenz-like dataset shape", "[dataset][slow]") {
    GroundTruthSystem sys = LorenzLike{};
    IntegratorConfig cfg;
    cfg.t_int = 80.0;
    cfg.dt = 0.005;
    cfg.record_interval = 0.005;
    Vec ic(3);
    ic << 5.0, 5.0, 5.0;
    Dataset ds = generate_dataset(sys, {ic}, cfg);
    REQUIRE(ds.raw[0].states.rows() == 16000);
    REQUIRE(ds.raw[0].states.cols() == 3);
}
