#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dsr/common.hpp"

namespace dsr {

// Unforced Duffing oscillator
//   x' = y
//   y' = a*y - x*(b + c*x^2)
// Defaults place it in the bistable regime with stable foci at (+-sqrt(-b/c), 0)
// and a saddle at the origin.
struct Duffing {
    double a = -0.5;
    double b = -1.0;
    double c = 0.1;
};

// Lorenz-like system with two coexisting 1-scroll chaotic attractors:
//   x' = -(a*b/(a+b))*x - y*z + c
//   y' = a*y + x*z
//   z' = b*z + x*y
struct LorenzLike {
    double a = -10.0;
    double b = -4.0;
    double c = 18.1;
};

// Standard Lorenz-96 field x_j' = (x_{j+1} - x_{j-2})*x_{j-1} - x_j + F with
// periodic indices.
struct Lorenz96 {
    double forcing = 0.654502;
    int dim = 6;
};

// Planar polynomial field with two cycle solutions: the unit circle (an
// invariant algebraic curve, unstable) and a stable non-algebraic inner cycle.
struct TwoCycleVF {};

// Planar field built from trigonometric terms:
//   x' = 2*y*cos(x)
//   y' = x^2*sin(x) - 2*x*cos(x) + y^2*sin(x) - sin(x)
struct TrigVF {};

struct VanDerPol {
    double mu = 1.0;
};

struct HarmonicOscillator {
    double omega = 1.0;
};

struct LinearSystem {
    Mat A;
};

using GroundTruthSystem =
    std::variant<Duffing, LorenzLike, Lorenz96, TwoCycleVF, TrigVF, VanDerPol, HarmonicOscillator, LinearSystem>;

inline int system_dim(const GroundTruthSystem& sys) {
    return std::visit(
        [](const auto& s) -> int {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Duffing>) return 2;
            if constexpr (std::is_same_v<T, LorenzLike>) return 3;
            if constexpr (std::is_same_v<T, Lorenz96>) return s.dim;
            if constexpr (std::is_same_v<T, TwoCycleVF>) return 2;
            if constexpr (std::is_same_v<T, TrigVF>) return 2;
            if constexpr (std::is_same_v<T, VanDerPol>) return 2;
            if constexpr (std::is_same_v<T, HarmonicOscillator>) return 2;
            if constexpr (std::is_same_v<T, LinearSystem>) return static_cast<int>(s.A.rows());
        },
        sys);
}

inline std::string system_name(const GroundTruthSystem& sys) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Duffing>) return "duffing";
            if constexpr (std::is_same_v<T, LorenzLike>) return "lorenz-like";
            if constexpr (std::is_same_v<T, Lorenz96>) return "lorenz96";
            if constexpr (std::is_same_v<T, TwoCycleVF>) return "two-cycle";
            if constexpr (std::is_same_v<T, TrigVF>) return "trig";
            if constexpr (std::is_same_v<T, VanDerPol>) return "van-der-pol";
            if constexpr (std::is_same_v<T, HarmonicOscillator>) return "harmonic";
            if constexpr (std::is_same_v<T, LinearSystem>) return "linear";
        },
        sys);
}

namespace detail {

inline Vec duffing_vf(const Duffing& s, const Vec& x) {
    Vec dx(2);
    dx[0] = x[1];
    dx[1] = s.a * x[1] - x[0] * (s.b + s.c * x[0] * x[0]);
    return dx;
}

inline Mat duffing_jac(const Duffing& s, const Vec& x) {
    Mat j(2, 2);
    j << 0.0, 1.0, -s.b - 3.0 * s.c * x[0] * x[0], s.a;
    return j;
}

inline Vec lorenz_like_vf(const LorenzLike& s, const Vec& x) {
    Vec dx(3);
    const double k = s.a * s.b / (s.a + s.b);
    dx[0] = -k * x[0] - x[1] * x[2] + s.c;
    dx[1] = s.a * x[1] + x[0] * x[2];
    dx[2] = s.b * x[2] + x[0] * x[1];
    return dx;
}

inline Mat lorenz_like_jac(const LorenzLike& s, const Vec& x) {
    const double k = s.a * s.b / (s.a + s.b);
    Mat j(3, 3);
    j << -k, -x[2], -x[1],
        x[2], s.a, x[0],
        x[1], x[0], s.b;
    return j;
}

inline Vec lorenz96_vf(const Lorenz96& s, const Vec& x) {
    const int n = s.dim;
    Vec dx(n);
    auto at = [&](int j) { return x[((j % n) + n) % n]; };
    for (int j = 0; j < n; ++j) dx[j] = (at(j + 1) - at(j - 2)) * at(j - 1) - x[j] + s.forcing;
    return dx;
}

inline Mat lorenz96_jac(const Lorenz96& s, const Vec& x) {
    const int n = s.dim;
    Mat j = Mat::Zero(n, n);
    auto wrap = [&](int k) { return ((k % n) + n) % n; };
    for (int r = 0; r < n; ++r) {
        j(r, wrap(r + 1)) += x[wrap(r - 1)];
        j(r, wrap(r - 2)) += -x[wrap(r - 1)];
        j(r, wrap(r - 1)) += x[wrap(r + 1)] - x[wrap(r - 2)];
        j(r, r) += -1.0;
    }
    return j;
}

inline Vec two_cycle_vf(const Vec& v) {
    const double x = v[0], y = v[1];
    const double r2 = x * x + y * y;
    const double q = 4.0 * x * x - 4.0 * x * y + 4.0 * y * y;
    Vec dx(2);
    dx[0] = x + x * (r2 - 1.0) * q + r2 * (-2.0 * x + 2.0 * y + x * x * x + x * y * y);
    dx[1] = y + y * (r2 - 1.0) * q + r2 * (-2.0 * x - 2.0 * y + y * y * y + x * x * y);
    return dx;
}

// Jacobian of the expanded monomial form
//   x' = x - 6x^3 + 6x^2 y - 6x y^2 + 2y^3 + 5x^5 - 4x^4 y + 10x^3 y^2 - 4x^2 y^3 + 5x y^4
//   y' = y - 2x^3 - 6x^2 y + 2x y^2 - 6y^3 + 5x^4 y - 4x^3 y^2 + 10x^2 y^3 - 4x y^4 + 5y^5
inline Mat two_cycle_jac(const Vec& v) {
    const double x = v[0], y = v[1];
    const double x2 = x * x, x3 = x2 * x, x4 = x3 * x;
    const double y2 = y * y, y3 = y2 * y, y4 = y3 * y;
    Mat j(2, 2);
    j(0, 0) = 1.0 - 18.0 * x2 + 12.0 * x * y - 6.0 * y2 + 25.0 * x4 - 16.0 * x3 * y + 30.0 * x2 * y2 -
              8.0 * x * y3 + 5.0 * y4;
    j(0, 1) = 6.0 * x2 - 12.0 * x * y + 6.0 * y2 - 4.0 * x4 + 20.0 * x3 * y - 12.0 * x2 * y2 + 20.0 * x * y3;
    j(1, 0) = -6.0 * x2 - 12.0 * x * y + 2.0 * y2 + 20.0 * x3 * y - 12.0 * x2 * y2 + 20.0 * x * y3 - 4.0 * y4;
    j(1, 1) = 1.0 - 6.0 * x2 + 4.0 * x * y - 18.0 * y2 + 5.0 * x4 - 8.0 * x3 * y + 30.0 * x2 * y2 -
              16.0 * x * y3 + 25.0 * y4;
    return j;
}

inline Vec trig_vf(const Vec& v) {
    const double x = v[0], y = v[1];
    Vec dx(2);
    dx[0] = 2.0 * y * std::cos(x);
    dx[1] = x * x * std::sin(x) - 2.0 * x * std::cos(x) + y * y * std::sin(x) - std::sin(x);
    return dx;
}

inline Mat trig_jac(const Vec& v) {
    const double x = v[0], y = v[1];
    const double sx = std::sin(x), cx = std::cos(x);
    Mat j(2, 2);
    j(0, 0) = -2.0 * y * sx;
    j(0, 1) = 2.0 * cx;
    j(1, 0) = (x * x + y * y - 3.0) * cx + 4.0 * x * sx;
    j(1, 1) = 2.0 * y * sx;
    return j;
}

}  // namespace detail

inline Vec eval_vf(const GroundTruthSystem& sys, const Vec& x) {
    require(x.size() == system_dim(sys), "eval_vf: state dimension mismatch for system " + system_name(sys));
    return std::visit(
        [&](const auto& s) -> Vec {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Duffing>) return detail::duffing_vf(s, x);
            if constexpr (std::is_same_v<T, LorenzLike>) return detail::lorenz_like_vf(s, x);
            if constexpr (std::is_same_v<T, Lorenz96>) return detail::lorenz96_vf(s, x);
            if constexpr (std::is_same_v<T, TwoCycleVF>) return detail::two_cycle_vf(x);
            if constexpr (std::is_same_v<T, TrigVF>) return detail::trig_vf(x);
            if constexpr (std::is_same_v<T, VanDerPol>) {
                Vec dx(2);
                dx[0] = x[1];
                dx[1] = s.mu * (1.0 - x[0] * x[0]) * x[1] - x[0];
                return dx;
            }
            if constexpr (std::is_same_v<T, HarmonicOscillator>) {
                Vec dx(2);
                dx[0] = x[1];
                dx[1] = -s.omega * s.omega * x[0];
                return dx;
            }
            if constexpr (std::is_same_v<T, LinearSystem>) return s.A * x;
        },
        sys);
}

inline Mat jacobian_vf(const GroundTruthSystem& sys, const Vec& x) {
    require(x.size() == system_dim(sys), "jacobian_vf: state dimension mismatch for system " + system_name(sys));
    return std::visit(
        [&](const auto& s) -> Mat {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Duffing>) return detail::duffing_jac(s, x);
            if constexpr (std::is_same_v<T, LorenzLike>) return detail::lorenz_like_jac(s, x);
            if constexpr (std::is_same_v<T, Lorenz96>) return detail::lorenz96_jac(s, x);
            if constexpr (std::is_same_v<T, TwoCycleVF>) return detail::two_cycle_jac(x);
            if constexpr (std::is_same_v<T, TrigVF>) return detail::trig_jac(x);
            if constexpr (std::is_same_v<T, VanDerPol>) {
                Mat j(2, 2);
                j << 0.0, 1.0, -2.0 * s.mu * x[0] * x[1] - 1.0, s.mu * (1.0 - x[0] * x[0]);
                return j;
            }
            if constexpr (std::is_same_v<T, HarmonicOscillator>) {
                Mat j(2, 2);
                j << 0.0, 1.0, -s.omega * s.omega, 0.0;
                return j;
            }
            if constexpr (std::is_same_v<T, LinearSystem>) return s.A;
        },
        sys);
}

inline GroundTruthSystem system_from_name(const std::string& name) {
    if (name == "duffing") return Duffing{};
    if (name == "lorenz-like") return LorenzLike{};
    if (name == "lorenz96") return Lorenz96{};
    if (name == "two-cycle") return TwoCycleVF{};
    if (name == "trig") return TrigVF{};
    if (name == "van-der-pol") return VanDerPol{};
    if (name == "harmonic") return HarmonicOscillator{};
    throw ValidationError("unknown system name: " + name);
}

}  // namespace dsr
