#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mvclt/bounds.hpp"
#include "mvclt/joint_table.hpp"
#include "mvclt/matrix.hpp"
#include "mvclt/model.hpp"

namespace mvclt {

/// F_i = sum_{u<v} a^(i)_uv X_u X_v for symmetric, zero-diagonal A_i and
/// independent inputs with mean 0 and variance 1.
struct QuadFormSpec {
  std::size_t n = 0;
  std::vector<Matrix> a;
  std::vector<ComponentDistribution> components;
  // Overrides for max_u Var(X_u^2) and max_u E|X_u|^4 when the laws do not
  // carry moments.
  std::optional<double> max_var_square;
  std::optional<double> max_fourth_moment;

  std::size_t dim() const { return a.size(); }
  void validate() const;
  double var_square_max() const;
  double fourth_moment_max() const;
};

/// Fills the lower triangle of an upper-triangle input. When the lower
/// triangle is present but disagrees by more than 1e-12 the upper triangle
/// wins and a message is appended to `warnings`.
Matrix symmetrize_upper(const Matrix& a, std::vector<std::string>* warnings = nullptr);

QuadFormSpec make_quadform_spec(std::vector<Matrix> a, std::vector<ComponentDistribution> components,
                                std::vector<std::string>* warnings = nullptr);

ProductModel quadform_model(const QuadFormSpec& spec);
StatisticVector build_quadratic_form(const QuadFormSpec& spec);

struct QfConditions {
  Matrix pairwise_covariance;     // sum_{u<v} a^(i)_uv a^(j)_uv
  Matrix trace_condition;         // sum_{u,v} (sum_k a^(i)_ku a^(j)_kv)^2, by direct summation
  Matrix trace_condition_matrix;  // the same as Tr(A_i^2 A_j^2)
  double trace_route_gap = 0.0;   // max |direct - matrix| / max(1, |direct|)
  std::vector<double> max_row_condition;  // max_u sum_v a_uv^2
  std::vector<double> dejong_tr_a4;       // Tr(A_i^4)
  Matrix covariance_gap;                  // |C - pairwise_covariance|
};

QfConditions qf_conditions(const QuadFormSpec& spec, const Matrix& c);

/// Four-term bound:
///   covariance_mismatch  g2/2 sum |C_ij - E F_i F_j|
///   Z_star_variance      g2/2^{3/2} sum sqrt(max{2, max Var X^2} trace_ij)
///   Z_ast_variance       g2/2^{3/2} sum sqrt(8 max Var X^2 max E X^4 sum_k r_ik r_jk)
///   third_moment         2^{3/2} max E X^4 g3 d^2/3 sum_i sum_k r_ik^{3/2}
/// with r_ik = sum_v (a^(i)_kv)^2.
BoundReport qf_bound(const QuadFormSpec& spec, const GaussianTarget& target, const SmoothnessConstants& g);

/// Realized Z* (with the X_k^2 - 1 weights) and Z-star (without) on an exact
/// table of the quadratic form; Z^(1/2) = (Z* + Z-star)/2.
struct QfZDecomposition {
  std::size_t dim = 0;
  std::vector<RandomVariableTable> ast;   // row-major d x d
  std::vector<RandomVariableTable> star;  // row-major d x d
};

QfZDecomposition qf_z_decomposition(const JointTable& table, const QuadFormSpec& spec);

struct QfSweepRow {
  std::size_t n = 0;
  BoundReport report;
  double covariance_gap = 0.0;  // max |C - pairwise covariance|
  double trace_max = 0.0;
  double row_max = 0.0;
  double dejong_max = 0.0;
};

struct QfSweep {
  std::vector<QfSweepRow> rows;
  std::vector<std::string> failures;  // per-n construction errors
  std::optional<double> slope;        // least-squares slope of log total on log n
  bool converging = false;            // trace and row conditions decay along the grid
};

using QfFamily = std::function<QuadFormSpec(std::size_t n)>;

QfSweep qf_clt_sweep(const QfFamily& family, const Matrix& c, const SmoothnessConstants& g,
                     const std::vector<std::size_t>& n_grid);

/// a_{u,u+1} = 1/sqrt(n-1), Rademacher inputs; Var F = 1.
QuadFormSpec tridiagonal_family(std::size_t n);
/// a_{1,v} = 1/sqrt(n-1) for v > 1: one row carries all mass; Var F = 1.
QuadFormSpec single_row_family(std::size_t n);

/// Dense row-major CSV of reals. Throws std::runtime_error naming the line.
Matrix load_matrix_csv(const std::string& path);

/// Least-squares slope of log y on log x over points with x, y > 0.
std::optional<double> log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mvclt
