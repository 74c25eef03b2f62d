#pragma once

#include <optional>
#include <vector>

#include "mvclt/matrix.hpp"

namespace mvclt {

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column k pairs with values[k]
  int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for symmetric matrices. Iterates until the
/// off-diagonal Frobenius mass is at most `rel_tol * ||C||_F`.
/// Throws std::invalid_argument for non-square or asymmetric input.
SymmetricEigen jacobi_eigen(const Matrix& c, double rel_tol = 1e-13, int max_sweeps = 100);

struct OperatorNorms {
  double op_norm = 0.0;
  std::optional<double> inv_op_norm;  // absent when C is not positive definite
};

OperatorNorms sym_operator_norms(const Matrix& c);

// Smallest eigenvalue must exceed this to count as positive definite.
double positive_definite_threshold(double op_norm);

/// Covariance of the Gaussian target Y. Caches the spectral decomposition,
/// the operator norms and (when C is positive definite) a Cholesky factor.
class GaussianTarget {
 public:
  explicit GaussianTarget(Matrix c);

  std::size_t dim() const { return c_.rows(); }
  const Matrix& covariance() const { return c_; }
  const SymmetricEigen& eigen() const { return eigen_; }
  double op_norm() const { return norms_.op_norm; }
  std::optional<double> inv_op_norm() const { return norms_.inv_op_norm; }
  bool positive_definite() const { return norms_.inv_op_norm.has_value(); }
  const std::optional<Matrix>& cholesky() const { return cholesky_; }

  // Q * sqrt(Lambda) restricted to eigen-directions above the null threshold;
  // Y = factor * Z with Z standard normal in factor.cols() dimensions.
  const Matrix& spectral_factor() const { return factor_; }

 private:
  Matrix c_;
  SymmetricEigen eigen_;
  OperatorNorms norms_;
  std::optional<Matrix> cholesky_;
  Matrix factor_;
};

std::optional<Matrix> cholesky(const Matrix& c);

}  // namespace mvclt
