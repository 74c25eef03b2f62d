#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mvclt/joint_table.hpp"
#include "mvclt/smooth_function.hpp"

namespace mvclt {

struct IdentityCheckResult {
  std::string check;
  std::string instance_id;
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

/// Replacement operators for mutation testing of the suite itself.
struct OperatorOverrides {
  std::function<RandomVariableTable(const RandomVariableTable&, std::size_t)> diff_d;
};

struct IdentitySuiteOptions {
  std::vector<double> alphas{0.0, 0.25, 0.5, 1.0};
  OperatorOverrides overrides;
  // Test function for the chain-rule check; a cosine ridge function is used
  // when empty.
  std::optional<SmoothTestFunction> chain_rule_function;
};

/// Runs every difference-operator identity and inequality on the components
/// of `table` (and on every ordered pair of components where the property is
/// bilinear). One result row per check. Violations are signed so that
/// `pass == (max_violation <= tolerance)`.
std::vector<IdentityCheckResult> run_identity_suite(const JointTable& table, const std::string& instance_id,
                                                    const IdentitySuiteOptions& options = {});

/// E[U | X_k]: a function of coordinate k alone.
RandomVariableTable coordinate_projection(const RandomVariableTable& u, std::size_t k);

/// Largest pointwise |U - (sum_k E[U|X_k] - (n - 1) E U)|; zero exactly when
/// U is a sum of univariate functions of distinct coordinates.
double additive_residual(const RandomVariableTable& u);

/// sum_k E[D_k U * d_alpha(V, k)]
double covariance_sum(const RandomVariableTable& u, const RandomVariableTable& v, double alpha);

}  // namespace mvclt
