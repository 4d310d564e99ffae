#pragma once

#include <vector>

#include "zclassifier/tensor.hpp"

namespace zc {

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Pairs are sorted by descending eigenvalue; eigenvectors are the columns.
struct SymmetricEigen {
  std::vector<double> eigenvalues;
  Tensor eigenvectors;  // [n x n], column j pairs with eigenvalues[j]
};

SymmetricEigen symmetric_eigen(const Tensor& a);

/// Lower Cholesky factor of a symmetric positive-definite matrix.
Tensor cholesky(const Tensor& a);

/// Solve L y = b for lower-triangular L.
std::vector<double> solve_lower(const Tensor& l, const std::vector<double>& b);
/// Solve L^T x = y.
std::vector<double> solve_lower_transposed(const Tensor& l, const std::vector<double>& y);

}  // namespace zc
