#include "mvclt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mvclt {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kPsdTolerance = 1e-10;

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

void require_symmetric(const Matrix& c, const char* who) {
  if (!c.is_square()) throw std::invalid_argument(std::string(who) + ": matrix not square");
  const double scale = std::max(1.0, max_abs(c));
  if (max_asymmetry(c) > kSymmetryTolerance * scale) {
    throw std::invalid_argument(std::string(who) + ": matrix not symmetric within tolerance");
  }
}

}  // namespace

SymmetricEigen jacobi_eigen(const Matrix& c, double rel_tol, int max_sweeps) {
  require_symmetric(c, "jacobi_eigen");
  const std::size_t n = c.rows();
  Matrix a = c;
  // Work on the exactly symmetric part.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (c(i, j) + c(j, i));
  Matrix v = Matrix::identity(n);
  const double target = rel_tol * frobenius_norm(a);

  int sweep = 0;
  while (off_diagonal_norm(a) > target) {
    if (sweep >= max_sweeps) {
      throw std::runtime_error("jacobi_eigen: no convergence within sweep limit");
    }
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * cs;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = cs * akp - sn * akq;
          a(k, q) = sn * akp + cs * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = cs * apk - sn * aqk;
          a(q, k) = sn * apk + cs * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = cs * vkp - sn * vkq;
          v(k, q) = sn * vkp + cs * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  SymmetricEigen out;
  out.sweeps = sweep;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

double positive_definite_threshold(double op_norm) { return 1e-12 * std::max(1.0, op_norm); }

namespace {

OperatorNorms norms_from_eigen(const SymmetricEigen& e) {
  OperatorNorms out;
  if (e.values.empty()) return out;
  out.op_norm = std::max(std::abs(e.values.front()), std::abs(e.values.back()));
  const double lambda_min = e.values.front();
  if (lambda_min > positive_definite_threshold(out.op_norm)) out.inv_op_norm = 1.0 / lambda_min;
  return out;
}

}  // namespace

OperatorNorms sym_operator_norms(const Matrix& c) {
  if (c.rows() > 64) throw std::invalid_argument("sym_operator_norms: dimension above 64");
  return norms_from_eigen(jacobi_eigen(c));
}

std::optional<Matrix> cholesky(const Matrix& c) {
  const std::size_t n = c.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = c(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) return std::nullopt;
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = c(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

GaussianTarget::GaussianTarget(Matrix c) : c_(std::move(c)) {
  require_symmetric(c_, "GaussianTarget");
  if (c_.rows() == 0) throw std::invalid_argument("GaussianTarget: empty covariance");
  eigen_ = jacobi_eigen(c_);
  norms_ = norms_from_eigen(eigen_);
  if (eigen_.values.front() < -kPsdTolerance * std::max(1.0, norms_.op_norm)) {
    throw std::invalid_argument("GaussianTarget: covariance is not positive semidefinite");
  }
  if (positive_definite()) cholesky_ = mvclt::cholesky(c_);

  const double null_cut = positive_definite_threshold(norms_.op_norm);
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < eigen_.values.size(); ++k)
    if (eigen_.values[k] > null_cut) active.push_back(k);
  factor_ = Matrix(dim(), active.size());
  for (std::size_t a = 0; a < active.size(); ++a) {
    const double root = std::sqrt(eigen_.values[active[a]]);
    for (std::size_t i = 0; i < dim(); ++i) factor_(i, a) = eigen_.vectors(i, active[a]) * root;
  }
}

}  // namespace mvclt
