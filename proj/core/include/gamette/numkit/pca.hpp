#pragma once

#include <vector>

#include "gamette/numkit/matrix.hpp"

namespace gamette::numkit {

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column j pairs with values[j]
  int sweeps = 0;
};

/// Cyclic Jacobi rotations on a symmetric matrix until the off-diagonal
/// Frobenius norm is at most `tolerance` times the matrix norm.
SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tolerance = 1e-12, int max_sweeps = 100);

/// Column covariance with population normalization (divides by rows).
Matrix covariance(const Matrix& data);

struct PcaResult {
  Matrix components;  // row i is the i-th loading vector
  std::vector<double> eigenvalues;
  std::vector<double> explained_fraction;
  Matrix scores;      // centered data projected on the loadings
  Matrix covariance;  // the decomposed matrix
};

/// Principal components of the column covariance. Each loading is oriented
/// so its largest-magnitude entry is positive (first such entry on ties).
PcaResult pca(const Matrix& data);

}  // namespace gamette::numkit
