// Algebraic-trajectory check: a circle satisfies x^2 + y^2 - 1 = 0, so its
// data Gram matrix over a polynomial library has a non-trivial kernel and no
// unique library fit exists; restricting the library restores uniqueness.
#include <iostream>

#include "dsr/identify/nullspace.hpp"
#include "dsr/integrate.hpp"

int main() {
    using namespace dsr;

    IntegratorConfig cfg;
    cfg.method = IntegratorMethod::Rk45;
    cfg.t_int = 6.28;
    cfg.record_interval = 0.01;
    Vec x0(2);
    x0 << 1.0, 0.0;
    Trajectory circle = integrate(HarmonicOscillator{}, x0, cfg);

    FunctionLibrary cubic = polynomial_library(2, 3);
    auto [learnable, report] = is_strictly_learnable(circle, cubic);
    std::cout << "circle vs degree-3 library: kernel dimension " << report.kernel_dim
              << (learnable ? " (strictly learnable)" : " (not strictly learnable)") << "\n";

    FunctionLibrary restricted = restrict_library(cubic, circle);
    std::cout << "restricted library (" << restricted.size() << " of " << cubic.size() << "):";
    for (const auto& name : restricted.names()) std::cout << " " << name;
    std::cout << "\n";
    return 0;
}
