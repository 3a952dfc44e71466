#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "dsr/common.hpp"

namespace dsr {

// One differentiable basis function psi: R^n -> R.
struct BasisFunction {
    enum class Kind { Monomial, Sin, Cos, Custom };
    Kind kind = Kind::Monomial;
    std::vector<int> exponents;  // Monomial: one exponent per coordinate
    int coord = 0;               // Sin/Cos: which coordinate
    std::string label;
    std::function<double(const Vec&)> fn;    // Custom only
    std::function<Vec(const Vec&)> grad_fn;  // Custom only

    double eval(const Vec& x) const {
        switch (kind) {
            case Kind::Monomial: {
                double v = 1.0;
                for (std::size_t d = 0; d < exponents.size(); ++d)
                    for (int e = 0; e < exponents[d]; ++e) v *= x[static_cast<int>(d)];
                return v;
            }
            case Kind::Sin:
                return std::sin(x[coord]);
            case Kind::Cos:
                return std::cos(x[coord]);
            case Kind::Custom:
                return fn(x);
        }
        return 0.0;
    }

    Vec gradient(const Vec& x) const {
        const int n = static_cast<int>(x.size());
        Vec g = Vec::Zero(n);
        switch (kind) {
            case Kind::Monomial:
                for (int d = 0; d < n; ++d) {
                    if (exponents[d] == 0) continue;
                    double v = static_cast<double>(exponents[d]);
                    for (int dd = 0; dd < n; ++dd) {
                        const int e = exponents[dd] - (dd == d ? 1 : 0);
                        for (int k = 0; k < e; ++k) v *= x[dd];
                    }
                    g[d] = v;
                }
                break;
            case Kind::Sin:
                g[coord] = std::cos(x[coord]);
                break;
            case Kind::Cos:
                g[coord] = -std::sin(x[coord]);
                break;
            case Kind::Custom:
                g = grad_fn(x);
                break;
        }
        return g;
    }

    static BasisFunction monomial(std::vector<int> exps) {
        BasisFunction f;
        f.kind = Kind::Monomial;
        f.exponents = std::move(exps);
        f.label = monomial_label(f.exponents);
        return f;
    }

    static std::string monomial_label(const std::vector<int>& exps) {
        std::string s;
        const char* vars = "xyzuvw";
        for (std::size_t d = 0; d < exps.size(); ++d) {
            if (exps[d] == 0) continue;
            s += exps.size() <= 6 ? std::string(1, vars[d]) : "x" + std::to_string(d + 1);
            if (exps[d] > 1) s += "^" + std::to_string(exps[d]);
        }
        return s.empty() ? "1" : s;
    }
};

// Ordered set of basis functions spanning a linearly parameterized model
// class. Monomials are ordered by total degree, then lexicographically with
// the leading coordinate's power descending: 1, x, y, x^2, xy, y^2, ...
class FunctionLibrary {
  public:
    FunctionLibrary() = default;
    FunctionLibrary(int dim, std::vector<BasisFunction> basis) : dim_(dim), basis_(std::move(basis)) {
        std::set<std::string> seen;
        for (const auto& f : basis_) {
            require(seen.insert(f.label).second, "library: duplicate basis function '" + f.label + "'");
        }
        require(!basis_.empty(), "library: need at least one basis function");
    }

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(basis_.size()); }
    const std::vector<BasisFunction>& basis() const { return basis_; }
    const BasisFunction& operator[](int i) const { return basis_[i]; }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(basis_.size());
        for (const auto& f : basis_) out.push_back(f.label);
        return out;
    }

    Vec eval_point(const Vec& x) const {
        Vec v(size());
        for (int i = 0; i < size(); ++i) v[i] = basis_[i].eval(x);
        return v;
    }

    // m x n matrix of basis gradients at x (row i = grad psi_i).
    Mat gradients(const Vec& x) const {
        Mat g(size(), dim_);
        for (int i = 0; i < size(); ++i) g.row(i) = basis_[i].gradient(x);
        return g;
    }

    FunctionLibrary subset(const std::vector<int>& keep) const {
        std::vector<BasisFunction> out;
        out.reserve(keep.size());
        for (int i : keep) out.push_back(basis_[i]);
        return FunctionLibrary(dim_, std::move(out));
    }

    FunctionLibrary without(int index) const {
        std::vector<int> keep;
        for (int i = 0; i < size(); ++i)
            if (i != index) keep.push_back(i);
        return subset(keep);
    }

  private:
    int dim_ = 0;
    std::vector<BasisFunction> basis_;
};

namespace detail {

inline void enumerate_monomials(int dim, int degree, std::vector<int>& current, int pos,
                                std::vector<std::vector<int>>& out) {
    if (pos == dim - 1) {
        current[pos] = degree;
        out.push_back(current);
        return;
    }
    for (int e = degree; e >= 0; --e) {
        current[pos] = e;
        enumerate_monomials(dim, degree - e, current, pos + 1, out);
    }
}

}  // namespace detail

inline FunctionLibrary polynomial_library(int dim, int max_degree) {
    require(dim >= 1 && max_degree >= 0, "polynomial_library: bad arguments");
    std::vector<BasisFunction> basis;
    for (int g = 0; g <= max_degree; ++g) {
        std::vector<std::vector<int>> exps;
        std::vector<int> current(dim, 0);
        detail::enumerate_monomials(dim, g, current, 0, exps);
        for (auto& e : exps) basis.push_back(BasisFunction::monomial(std::move(e)));
    }
    return FunctionLibrary(dim, std::move(basis));
}

// sin/cos of each coordinate, coordinate-major order.
inline FunctionLibrary trig_library(int dim, bool with_sin = true, bool with_cos = true) {
    std::vector<BasisFunction> basis;
    const char* vars = "xyzuvw";
    for (int d = 0; d < dim; ++d) {
        const std::string v = dim <= 6 ? std::string(1, vars[d]) : "x" + std::to_string(d + 1);
        if (with_sin) {
            BasisFunction f;
            f.kind = BasisFunction::Kind::Sin;
            f.coord = d;
            f.label = "sin(" + v + ")";
            basis.push_back(f);
        }
        if (with_cos) {
            BasisFunction f;
            f.kind = BasisFunction::Kind::Cos;
            f.coord = d;
            f.label = "cos(" + v + ")";
            basis.push_back(f);
        }
    }
    return FunctionLibrary(dim, std::move(basis));
}

inline FunctionLibrary concat_libraries(const FunctionLibrary& a, const FunctionLibrary& b) {
    require(a.dim() == b.dim(), "concat_libraries: dimension mismatch");
    std::vector<BasisFunction> basis = a.basis();
    for (const auto& f : b.basis()) basis.push_back(f);
    return FunctionLibrary(a.dim(), std::move(basis));
}

// Column j of the returned T x m matrix is psi_j evaluated on each row of X.
inline Mat library_features(const FunctionLibrary& lib, const Mat& X) {
    require(X.cols() == lib.dim(), "library_features: state dimension mismatch");
    Mat theta(X.rows(), lib.size());
    for (int t = 0; t < X.rows(); ++t) {
        const Vec x = X.row(t);
        for (int i = 0; i < lib.size(); ++i) theta(t, i) = lib[i].eval(x);
    }
    return theta;
}

}  // namespace dsr
