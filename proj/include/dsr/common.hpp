#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Thrown on malformed configs, files, or argument contracts (CLI exit code 2).
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on numerical failures: divergence, non-finite losses, failed solves
// (CLI exit code 3).
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Ill-conditioned linear solves; carries the offending column names when known.
class ConditioningError : public NumericalError {
  public:
    ConditioningError(const std::string& what, std::vector<std::string> columns = {})
        : NumericalError(what), columns_(std::move(columns)) {}
    const std::vector<std::string>& columns() const { return columns_; }

  private:
    std::vector<std::string> columns_;
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

// Decimal formatting with 17 significant digits (round-trip exact for doubles).
inline std::string format_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline double sq(double x) { return x * x; }

}  // namespace dsr
