#pragma once

#include <optional>
#include <vector>

#include "mednns/tensor.hpp"

namespace mednns {

struct GaussianStats {
    Tensor mean;        // [d]
    Tensor cov;         // [d, d], symmetric, regularized with eps*I
    std::size_t count = 0;
};

// Sample mean and unbiased covariance of the rows of features [n, d],
// with Sigma += eps*I. Requires n >= 2.
GaussianStats fit_gaussian(const Tensor& features, float eps = 1e-6f);

// Frechet distance between Gaussians:
//   ||mu_a - mu_b||^2 + tr(Sa + Sb - 2 (Sa^1/2 Sb Sa^1/2)^1/2)
// Matrix square roots via symmetric Jacobi eigendecomposition with
// negative eigenvalues clamped to zero; result clamped to >= 0.
double fid(const GaussianStats& a, const GaussianStats& b);

// Jacobi eigendecomposition of a symmetric matrix. Returns eigenvalues
// (ascending) and eigenvectors as columns of V.
struct EigenDecomposition {
    std::vector<double> values;
    Tensor vectors;  // [d, d], column i is the eigenvector of values[i]
};
EigenDecomposition jacobi_eigh(const Tensor& sym, double tol = 1e-10, int max_sweeps = 100);

// Spearman rank correlation with average ranks for ties.
// Zero-variance input (all ranks tied) is degenerate -> nullopt.
std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y);

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> average_ranks(const std::vector<double>& v);

}  // namespace mednns
