#pragma once

#include <optional>
#include <string>

#include "mvclt/bounds.hpp"
#include "mvclt/joint_table.hpp"

namespace mvclt {

/// True when every coordinate is +-1 with probability 1/2 each.
bool is_rademacher(const ProductModel& model);

/// Discrete Malliavin derivative D_k U = (U with x_k = +1 - U with x_k = -1) / 2.
/// Throws std::invalid_argument on a non-Rademacher layout.
RandomVariableTable malliavin_derivative(const RandomVariableTable& u, std::size_t k);

/// max |D_k U - X_k D_k U| over assignments, where the first D is the
/// product-space difference operator.
double malliavin_lemma_residual(const RandomVariableTable& u, std::size_t k);

/// T_ij = sum_k D_k F_i (alpha E[D_k F_j | x_1..x_{k-1}] + (1 - alpha) E[D_k F_j | x_{k+1}..x_n]).
/// Returned in the same shape as the product-space Z^(alpha).
ZAlpha t_alpha_matrix(const JointTable& table, double alpha);

/// Per component i: sum_k E|D_k F_i|^3 with the Malliavin derivative.
std::vector<double> malliavin_third_moment_sum(const JointTable& table);

struct RademacherBounds {
  BoundReport d3;
  std::optional<BoundReport> d2;
  std::string d2_reason;  // why d2 is absent
};

/// d3 bound:  g2 (d/2) (sum E|C - T|^2)^{1/2} + g3 (d^2/3) sum E|D_k F_i|^3
/// d2 bound:  ||C^-1|| ||C||^{1/2} Lip (sum E|C - T|^2)^{1/2}
///            + sqrt(2 pi)/4 ||C^-1||^{3/2} ||C|| M_2 d^2 sum E|D_k F_i|^3
/// The distance bounds themselves correspond to SmoothnessConstants::unit().
/// d2 is omitted, with a reason, when C is singular or Lip/M_2 are absent.
RademacherBounds rademacher_bounds(const JointTable& table, const GaussianTarget& target,
                                   const SmoothnessConstants& g, double alpha);

}  // namespace mvclt
