#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mvclt {

/// Dense row-major matrix of doubles. Sized for the d x d covariance
/// matrices and n x n coefficient matrices this library works with.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  bool is_square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
// Skips zero entries of the left factor, so banded coefficient matrices
// multiply in roughly O(n^2).
Matrix operator*(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
double trace(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
// max |a_ij - a_ji|
double max_asymmetry(const Matrix& a);
// Trace of a*b without forming the product.
double trace_of_product(const Matrix& a, const Matrix& b);

}  // namespace mvclt
