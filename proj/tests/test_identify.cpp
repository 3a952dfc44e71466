#include "dsr/identify/nullspace.hpp"

#include "dsr/integrate.hpp"
#include "testutil.hpp"

using namespace dsr;

namespace {

// Unit circle sampled at interval dt (one full turn plus change).
Mat circle_points(int count, double dt = 0.01) {
    Mat pts(count, 2);
    for (int k = 0; k < count; ++k) {
        pts(k, 0) = std::cos(k * dt);
        pts(k, 1) = std::sin(k * dt);
    }
    return pts;
}

Mat vdp_limit_cycle(int tail = 2000) {
    GroundTruthSystem sys = VanDerPol{};
    IntegratorConfig cfg;
    cfg.t_int = 30.0 + tail * 0.01;
    cfg.dt = 0.01;
    cfg.record_interval = 0.01;
    Vec x0(2);
    x0 << 2.0, 0.0;
    Trajectory traj = integrate(sys, x0, cfg);
    return traj.states.bottomRows(tail);
}

int basis_index(const FunctionLibrary& lib, const std::string& name) {
    auto names = lib.names();
    return static_cast<int>(std::find(names.begin(), names.end(), name) - names.begin());
}

}  // namespace

TEST_CASE("gram matrix: hand values", "[gram]") {
    // library {1} on any T-point trajectory -> [[T]]
    FunctionLibrary ones = polynomial_library(1, 0);
    Mat pts = Mat::Random(17, 1);
    Mat g = gram_matrix(ones, pts);
    REQUIRE(g.rows() == 1);
    REQUIRE(g(0, 0) == 17.0);

    // {1, x} on points {0, 1} -> [[2, 1], [1, 1]]
    FunctionLibrary affine = polynomial_library(1, 1);
    Mat two(2, 1);
    two << 0.0, 1.0;
    Mat g2 = gram_matrix(affine, two);
    Mat expected(2, 2);
    expected << 2.0, 1.0, 1.0, 1.0;
    REQUIRE((g2 - expected).norm() == 0.0);
}

TEST_CASE("gram matrix equals feature gram", "[gram]") {
    FunctionLibrary lib = polynomial_library(2, 3);
    Rng rng(3);
    Mat pts = rng.normal_mat(50, 2);
    Mat f = library_features(lib, pts);
    REQUIRE((gram_matrix(lib, pts) - f.transpose() * f).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("gram matrix is permutation equivariant", "[gram]") {
    FunctionLibrary lib = polynomial_library(2, 2);
    Rng rng(5);
    Mat pts = rng.normal_mat(30, 2);
    Mat g = gram_matrix(lib, pts);

    std::vector<int> perm = {3, 0, 5, 1, 4, 2};
    FunctionLibrary shuffled = lib.subset(perm);
    Mat gp = gram_matrix(shuffled, pts);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) REQUIRE(gp(i, j) == g(perm[i], perm[j]));
}

TEST_CASE("circle with cubic library: three-dimensional kernel", "[nullspace]") {
    Mat circle = circle_points(650);
    auto [learnable, report] = is_strictly_learnable(circle, polynomial_library(2, 3));
    REQUIRE_FALSE(learnable);
    REQUIRE(report.kernel_dim == 3);
    // every kernel vector satisfies the invariants
    for (int c = 0; c < report.kernel.cols(); ++c) {
        REQUIRE(report.kernel.col(c).norm() == Catch::Approx(1.0).epsilon(1e-12));
        REQUIRE((report.gram * report.kernel.col(c)).norm() <
                report.tolerance * 10.0 + 1e-9 * report.singular_values[0]);
    }
}

TEST_CASE("circle with quadratic library: kernel encodes x^2 + y^2 - 1", "[nullspace]") {
    Mat circle = circle_points(650);
    FunctionLibrary lib = polynomial_library(2, 2);
    auto [learnable, report] = is_strictly_learnable(circle, lib);
    REQUIRE_FALSE(learnable);
    REQUIRE(report.kernel_dim == 1);
    Vec expected(6);  // basis order 1, x, y, x^2, xy, y^2
    expected << -1.0, 0.0, 0.0, 1.0, 0.0, 1.0;
    expected.normalize();
    const double cosine = std::abs(report.kernel.col(0).dot(expected));
    REQUIRE(cosine > 0.999);
}

TEST_CASE("van der pol limit cycle is non-algebraic", "[nullspace]") {
    Mat cycle = vdp_limit_cycle();
    auto [learnable, report] = is_strictly_learnable(cycle, polynomial_library(2, 3));
    REQUIRE(learnable);
    REQUIRE(report.kernel_dim == 0);
}

TEST_CASE("subsampled non-algebraic trajectory stays learnable", "[nullspace]") {
    Mat cycle = vdp_limit_cycle();
    const int m = polynomial_library(2, 3).size();
    const int keep = 10 * m;
    Mat sub(keep, 2);
    for (int i = 0; i < keep; ++i) sub.row(i) = cycle.row(i * (cycle.rows() / keep));
    auto [learnable, report] = is_strictly_learnable(sub, polynomial_library(2, 3));
    REQUIRE(learnable);
}

TEST_CASE("straight-line trajectory with collinear features is not learnable", "[nullspace]") {
    // x' = const runs along the line y = 2x; the library functions x and y
    // are proportional on that line
    Mat line(100, 2);
    for (int k = 0; k < 100; ++k) {
        line(k, 0) = 0.1 * k;
        line(k, 1) = 0.2 * k;
    }
    std::vector<BasisFunction> basis;
    basis.push_back(BasisFunction::monomial({1, 0}));
    basis.push_back(BasisFunction::monomial({0, 1}));
    auto [learnable, report] = is_strictly_learnable(line, FunctionLibrary(2, basis));
    REQUIRE_FALSE(learnable);
    REQUIRE(report.kernel_dim == 1);
}

TEST_CASE("appending a pointwise-dependent function grows the kernel by one", "[nullspace]") {
    Mat cycle = vdp_limit_cycle(1200);
    FunctionLibrary lib = polynomial_library(2, 2);
    auto [base_learnable, base] = is_strictly_learnable(cycle, lib);

    BasisFunction combo;
    combo.kind = BasisFunction::Kind::Custom;
    combo.label = "x+2y";
    combo.fn = [](const Vec& x) { return x[0] + 2.0 * x[1]; };
    combo.grad_fn = [](const Vec& x) {
        Vec g(2);
        g << 1.0, 2.0;
        return g;
    };
    std::vector<BasisFunction> extended = lib.basis();
    extended.push_back(combo);
    auto [ext_learnable, ext] = is_strictly_learnable(cycle, FunctionLibrary(2, extended));
    REQUIRE(ext.kernel_dim == base.kernel_dim + 1);
}

TEST_CASE("restrict_library on the circle", "[restrict]") {
    Mat circle = circle_points(650);

    SECTION("degree 2: one of {1, x^2, y^2} removed, remainder learnable") {
        FunctionLibrary lib = polynomial_library(2, 2);
        FunctionLibrary restricted = restrict_library(lib, circle);
        REQUIRE(restricted.size() == 5);
        auto names = restricted.names();
        int removed_count = 0;
        for (const std::string& cand : {"1", "x^2", "y^2"})
            if (std::find(names.begin(), names.end(), cand) == names.end()) ++removed_count;
        REQUIRE(removed_count == 1);
        auto [learnable, report] = is_strictly_learnable(circle, restricted);
        REQUIRE(learnable);
    }

    SECTION("degree 3: removal count equals the original kernel dimension") {
        FunctionLibrary lib = polynomial_library(2, 3);
        auto [_, report] = is_strictly_learnable(circle, lib);
        FunctionLibrary restricted = restrict_library(lib, circle);
        REQUIRE(lib.size() - restricted.size() == report.kernel_dim);
        auto [learnable, after] = is_strictly_learnable(circle, restricted);
        REQUIRE(learnable);
    }

    SECTION("already-learnable library is returned unchanged") {
        Mat cycle = vdp_limit_cycle(1000);
        FunctionLibrary lib = polynomial_library(2, 3);
        FunctionLibrary restricted = restrict_library(lib, cycle);
        REQUIRE(restricted.size() == lib.size());
        REQUIRE(restricted.names() == lib.names());
    }
}

TEST_CASE("restricted library is always a subset", "[restrict]") {
    Mat circle = circle_points(400);
    FunctionLibrary lib = polynomial_library(2, 4);
    FunctionLibrary restricted = restrict_library(lib, circle);
    auto full = lib.names();
    for (const std::string& name : restricted.names())
        REQUIRE(std::find(full.begin(), full.end(), name) != full.end());
    auto [learnable, _] = is_strictly_learnable(circle, restricted);
    REQUIRE(learnable);
}

TEST_CASE("nullspace report serializes", "[nullspace]") {
    Mat circle = circle_points(300);
    auto [_, report] = is_strictly_learnable(circle, polynomial_library(2, 2));
    auto j = report.to_json();
    REQUIRE(j["kernel_dim"] == 1);
    REQUIRE(j["basis"].size() == 6);
    REQUIRE(j["kernel"].size() == 1);
}
