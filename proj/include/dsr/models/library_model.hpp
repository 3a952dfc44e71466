#pragma once

#include "dsr/models/function_library.hpp"

namespace dsr {

// Linearly parameterized vector field f_j(x) = sum_i Xi(i,j) psi_i(x).
struct LibraryModel {
    FunctionLibrary library;
    Mat Xi;  // m x n coefficients

    int dim() const { return library.dim(); }

    void check() const {
        require(Xi.rows() == library.size(), "library model: Xi row count must equal library size");
        require(Xi.cols() == library.dim(), "library model: Xi column count must equal state dimension");
    }

    Vec vf(const Vec& x) const { return Xi.transpose() * library.eval_point(x); }

    Mat jac(const Vec& x) const { return Xi.transpose() * library.gradients(x); }

    // Active (non-zero) coefficient pattern.
    std::vector<std::pair<int, int>> support() const {
        std::vector<std::pair<int, int>> s;
        for (int i = 0; i < Xi.rows(); ++i)
            for (int j = 0; j < Xi.cols(); ++j)
                if (Xi(i, j) != 0.0) s.emplace_back(i, j);
        return s;
    }

    double coefficient(const std::string& basis_label, int out_dim) const {
        for (int i = 0; i < library.size(); ++i)
            if (library[i].label == basis_label) return Xi(i, out_dim);
        throw ValidationError("library model: no basis function '" + basis_label + "'");
    }
};

}  // namespace dsr
