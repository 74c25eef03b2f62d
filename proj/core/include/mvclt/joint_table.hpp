#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mvclt/matrix.hpp"
#include "mvclt/model.hpp"
#include "mvclt/smooth_function.hpp"

namespace mvclt {

/// Mixed-radix enumeration of a finite product space. Rows are assignments
/// in lexicographic order with coordinate 0 varying slowest; each row
/// carries its product probability.
class TableLayout {
 public:
  static std::shared_ptr<const TableLayout> create(const ProductModel& model,
                                                   std::uint64_t cap = kDefaultEnumerationCap);

  const ProductModel& model() const { return model_; }
  std::size_t rows() const { return weights_.size(); }
  std::size_t coordinates() const { return radix_.size(); }
  std::size_t radix(std::size_t k) const { return radix_[k]; }
  std::size_t stride(std::size_t k) const { return stride_[k]; }

  std::size_t digit(std::size_t row, std::size_t k) const { return (row / stride_[k]) % radix_[k]; }
  std::size_t with_digit(std::size_t row, std::size_t k, std::size_t atom) const {
    return row - digit(row, k) * stride_[k] + atom * stride_[k];
  }
  double coordinate_value(std::size_t row, std::size_t k) const {
    return model_[k].atoms()[digit(row, k)].value;
  }
  double atom_prob(std::size_t k, std::size_t atom) const { return model_[k].atoms()[atom].prob; }
  std::vector<double> assignment(std::size_t row) const;

  double weight(std::size_t row) const { return weights_[row]; }
  std::span<const double> weights() const { return weights_; }

 private:
  explicit TableLayout(const ProductModel& model) : model_(model) {}

  ProductModel model_;
  std::vector<std::size_t> radix_;
  std::vector<std::size_t> stride_;
  std::vector<double> weights_;
};

/// A real random variable realized on every row of a layout.
class RandomVariableTable {
 public:
  RandomVariableTable(std::shared_ptr<const TableLayout> layout, std::vector<double> values);

  const TableLayout& layout() const { return *layout_; }
  const std::shared_ptr<const TableLayout>& layout_ptr() const { return layout_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t row) const { return values_[row]; }
  std::span<const double> values() const { return values_; }

  double expectation() const;
  double variance() const;
  // E|U|^p
  double abs_moment(double p) const;
  double max_abs() const;

  template <class Fn>
  RandomVariableTable map(Fn&& fn) const {
    std::vector<double> out(values_.size());
    for (std::size_t r = 0; r < values_.size(); ++r) out[r] = fn(values_[r]);
    return {layout_, std::move(out)};
  }

  friend RandomVariableTable operator+(const RandomVariableTable& a, const RandomVariableTable& b);
  friend RandomVariableTable operator-(const RandomVariableTable& a, const RandomVariableTable& b);
  friend RandomVariableTable operator*(const RandomVariableTable& a, const RandomVariableTable& b);
  friend RandomVariableTable operator*(double s, const RandomVariableTable& a);

 private:
  std::shared_ptr<const TableLayout> layout_;
  std::vector<double> values_;
};

// Largest pointwise |a - b|.
double max_abs_difference(const RandomVariableTable& a, const RandomVariableTable& b);

/// F evaluated once on every assignment of a finite product space.
class JointTable {
 public:
  JointTable(std::shared_ptr<const TableLayout> layout, std::size_t dim, std::vector<double> values);

  const TableLayout& layout() const { return *layout_; }
  const std::shared_ptr<const TableLayout>& layout_ptr() const { return layout_; }
  std::size_t dim() const { return dim_; }
  std::size_t rows() const { return layout_->rows(); }
  std::size_t coordinates() const { return layout_->coordinates(); }
  double value(std::size_t row, std::size_t i) const { return values_[row * dim_ + i]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * dim_, dim_);
  }
  RandomVariableTable component(std::size_t i) const;

 private:
  std::shared_ptr<const TableLayout> layout_;
  std::size_t dim_;
  std::vector<double> values_;
};

/// Evaluates F exactly once per assignment. Throws CapExceededError when the
/// product of atom counts exceeds `cap`, NonFiniteValueError on NaN/inf.
JointTable build_joint_table(const ProductModel& model, const StatisticVector& f,
                             std::uint64_t cap = kDefaultEnumerationCap);

struct Moments {
  std::vector<double> mean;
  Matrix covariance;
};

Moments moments(const JointTable& table);

/// F - E[F]. The bounds assume a centered statistic.
JointTable centered(const JointTable& table);

/// E_k[U]: integrates out coordinate k only.
RandomVariableTable coordinate_expectation(const RandomVariableTable& u, std::size_t k);

/// D_k U = U - E_k[U].
RandomVariableTable diff_D(const RandomVariableTable& u, std::size_t k);

/// d_k U = sqrt(1/2 E'_k |U - T_k U|^2), T_k resampling coordinate k from
/// an independent copy (an exact second sum over the same atoms).
RandomVariableTable diff_d(const RandomVariableTable& u, std::size_t k);

/// Conditional expectation given a prefix or suffix of coordinates.
/// past:   condition on coordinates [0, boundary), boundary in [0, n];
///         boundary 0 gives E[U].
/// future: condition on coordinates [boundary, n), boundary in [0, n];
///         boundary n gives E[U].
/// With 1-based sigma-fields F_i = sigma(X_1..X_i) and G_i = sigma(X_i..X_n),
/// E[U|F_i] is cond_exp(u, i, past) and E[U|G_i] is cond_exp(u, i - 1, future).
RandomVariableTable cond_exp(const RandomVariableTable& u, std::size_t boundary, Filtration f);

/// alpha * E[D_k V | coordinates <= k] + (1 - alpha) * E[D_k V | coordinates >= k].
RandomVariableTable d_alpha(const RandomVariableTable& v, std::size_t k, double alpha);

struct ZAlpha {
  double alpha = 0.5;
  std::size_t dim = 0;
  Matrix mean;
  Matrix variance;
  std::vector<RandomVariableTable> tables;  // row-major d x d

  const RandomVariableTable& table(std::size_t i, std::size_t j) const { return tables[i * dim + j]; }
};

/// Z_ij = sum_k D_k F_i * d_alpha(F_j, k) with its mean (equal to the
/// covariance of F_i, F_j) and variance.
ZAlpha z_alpha_moments(const JointTable& table, double alpha);

/// Per component i: sum_k E|D_k F_i|^3.
std::vector<double> third_abs_moment_sum(const JointTable& table);

/// Largest pointwise violation of the approximate chain rule
///   |D_k f(F) - sum_i d_i f(F) D_k F_i| <= 1/2 ||f''|| sum_{i,j} [(d_k F_i)^2 + (d_k F_j)^2].
/// Returns max(LHS - RHS) over assignments; a correct engine yields <= 0 up
/// to rounding. Requires f.grad and f.constants.g2_inf.
double chain_rule_residual_check(const JointTable& table, const SmoothTestFunction& f, std::size_t k);

}  // namespace mvclt
