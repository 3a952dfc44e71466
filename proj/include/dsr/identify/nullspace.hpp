#pragma once

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "dsr/models/function_library.hpp"
#include "dsr/trajectory.hpp"

namespace dsr {

// Data Gram matrix of the basis functions over the trajectory points:
// G_{ji} = sum_k psi_j(x(t_k)) psi_i(x(t_k)). A trajectory solves an
// algebraic equation in the basis functions exactly when this matrix has a
// non-trivial kernel.
inline Mat gram_matrix(const FunctionLibrary& lib, const Mat& states) {
    const Mat features = library_features(lib, states);
    const int m = lib.size();
    // accumulated point by point so the entries are exactly permutation
    // equivariant in the library order
    Mat gram = Mat::Zero(m, m);
    for (int k = 0; k < features.rows(); ++k) {
        const auto row = features.row(k);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) gram(j, i) += row[j] * row[i];
    }
    return gram;
}

inline Mat gram_matrix(const FunctionLibrary& lib, const Trajectory& traj) {
    return gram_matrix(lib, traj.states);
}

struct NullspaceReport {
    Mat gram;
    Vec singular_values;  // descending
    int kernel_dim = 0;
    Mat kernel;  // one unit-norm coefficient vector per column
    double tolerance = 0.0;
    double tol_rel = 0.0;
    std::vector<std::string> basis_names;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["kernel_dim"] = kernel_dim;
        j["tolerance"] = tolerance;
        j["tol_rel"] = tol_rel;
        j["singular_values"] = std::vector<double>(singular_values.data(),
                                                   singular_values.data() + singular_values.size());
        j["basis"] = basis_names;
        nlohmann::json kernel_json = nlohmann::json::array();
        for (int c = 0; c < kernel.cols(); ++c)
            kernel_json.push_back(std::vector<double>(kernel.col(c).data(), kernel.col(c).data() + kernel.rows()));
        j["kernel"] = kernel_json;
        return j;
    }
};

// Kernel threshold scaling: the default tolerance is 1e-8 * sqrt(T) relative
// to the largest singular value, tracking float accumulation in the Gram
// sums.
inline double default_nullspace_tol(int sample_count) { return 1e-8 * std::sqrt(static_cast<double>(sample_count)); }

inline NullspaceReport nullspace(const Mat& gram, double tol_rel) {
    require(gram.rows() == gram.cols(), "nullspace: gram matrix must be square");
    require((gram - gram.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, gram.cwiseAbs().maxCoeff()),
            "nullspace: gram matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
    require(eig.info() == Eigen::Success, "nullspace: eigendecomposition failed");
    const int m = static_cast<int>(gram.rows());
    const Vec evals = eig.eigenvalues();  // ascending, >= 0 up to roundoff
    NullspaceReport report;
    report.gram = gram;
    report.tol_rel = tol_rel;
    report.singular_values.resize(m);
    for (int i = 0; i < m; ++i) report.singular_values[i] = std::max(evals[m - 1 - i], 0.0);
    const double sigma_max = report.singular_values[0];
    report.tolerance = tol_rel * sigma_max;
    int kernel_dim = 0;
    for (int i = 0; i < m; ++i)
        if (std::max(evals[i], 0.0) < report.tolerance) ++kernel_dim;
    report.kernel_dim = kernel_dim;
    report.kernel.resize(m, kernel_dim);
    // eigenvectors of the smallest eigenvalues come first (deepest null
    // direction in column 0)
    for (int c = 0; c < kernel_dim; ++c) report.kernel.col(c) = eig.eigenvectors().col(c).normalized();
    return report;
}

// Theorem-2 test: a trajectory admits a unique, generalizing library fit iff
// it does not solve an algebraic equation in the basis functions, i.e. the
// data Gram matrix has a trivial kernel.
inline std::pair<bool, NullspaceReport> is_strictly_learnable(const Mat& states, const FunctionLibrary& lib,
                                                              double tol_rel = -1.0) {
    if (tol_rel <= 0.0) tol_rel = default_nullspace_tol(static_cast<int>(states.rows()));
    NullspaceReport report = nullspace(gram_matrix(lib, states), tol_rel);
    report.basis_names = lib.names();
    return {report.kernel_dim == 0, std::move(report)};
}

inline std::pair<bool, NullspaceReport> is_strictly_learnable(const Trajectory& traj, const FunctionLibrary& lib,
                                                              double tol_rel = -1.0) {
    return is_strictly_learnable(traj.states, lib, tol_rel);
}

// Corollary-1 restriction: greedily removes the basis function carrying the
// largest coefficient magnitude in the deepest kernel vector (ties broken
// toward the earlier library slot) until the kernel is trivial on the given
// trajectory.
inline FunctionLibrary restrict_library(const FunctionLibrary& lib, const Mat& states, double tol_rel = -1.0) {
    if (tol_rel <= 0.0) tol_rel = default_nullspace_tol(static_cast<int>(states.rows()));
    FunctionLibrary current = lib;
    while (true) {
        NullspaceReport report = nullspace(gram_matrix(current, states), tol_rel);
        if (report.kernel_dim == 0) return current;
        if (current.size() == 1)
            throw NumericalError("restrict_library: degenerate trajectory, no non-empty learnable sub-library");
        const Vec dominant = report.kernel.col(0);
        int remove = 0;
        double best = -1.0;
        for (int i = 0; i < dominant.size(); ++i) {
            if (std::abs(dominant[i]) > best + 1e-12) {
                best = std::abs(dominant[i]);
                remove = i;
            }
        }
        current = current.without(remove);
    }
}

inline FunctionLibrary restrict_library(const FunctionLibrary& lib, const Trajectory& traj,
                                        double tol_rel = -1.0) {
    return restrict_library(lib, traj.states, tol_rel);
}

}  // namespace dsr
