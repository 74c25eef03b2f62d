#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mvclt/bounds.hpp"
#include "mvclt/joint_table.hpp"
#include "mvclt/linalg.hpp"
#include "mvclt/model.hpp"
#include "mvclt/monte_carlo.hpp"
#include "mvclt/quadforms.hpp"
#include "mvclt/runs.hpp"
#include "mvclt/smooth_function.hpp"

namespace mvclt {

/// g(x) = cos(<t, x> + phase) with
///   lip = |t|_2, m2 = |t|_2^2, g1 = max|t_i|, g2 = max|t_i|^2, g3 = max|t_i|^3
/// and E g(Y) = cos(phase) exp(-t'Ct/2).
SmoothTestFunction make_cosine_family(std::vector<double> t, double phase);

/// x'Mx, with E g(Y) = Tr(MC). Diagnostic only: not globally Lipschitz.
SmoothTestFunction make_quadratic_function(const Matrix& m);

enum class GaussianMethod { analytic, quadrature, monte_carlo };
const char* to_string(GaussianMethod m);

struct GaussianParams {
  // Gauss-Hermite nodes per active dimension; the error estimate compares
  // against half as many.
  std::size_t nodes = 64;
  McConfig mc;
};

struct ValueWithError {
  double value = 0.0;
  double error = 0.0;
  std::string method;
};

/// Nodes and weights for integrals against exp(-x^2), by Newton iteration on
/// the Hermite recurrence.
void gauss_hermite(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

/// E g(Y) for Y ~ N(0, C). Throws std::invalid_argument when the method is
/// unavailable (no closed form; quadrature beyond 3 active dimensions).
ValueWithError gaussian_expectation(const SmoothTestFunction& g, const GaussianTarget& target,
                                    GaussianMethod method, const GaussianParams& params = {});

/// Picks analytic when available, else quadrature, else Monte Carlo.
ValueWithError gaussian_expectation_auto(const SmoothTestFunction& g, const GaussianTarget& target,
                                         const GaussianParams& params = {});

struct DiscrepancyResult {
  double lhs = 0.0;        // |E g(F) - E g(Y)|
  double lhs_error = 0.0;  // combined numerical or sampling error bar
  ValueWithError statistic_side;
  ValueWithError gaussian_side;
};

DiscrepancyResult discrepancy_exact(const JointTable& table, const SmoothTestFunction& g,
                                    const GaussianTarget& target, const GaussianParams& params = {});

/// Exact mode requires a finite product space within the enumeration cap and
/// reports an error otherwise; Monte Carlo mode samples F directly.
DiscrepancyResult discrepancy(const ProductModel& model, const StatisticVector& f, const SmoothTestFunction& g,
                              const GaussianTarget& target, EstimationMode mode, const GaussianParams& params = {});

struct ConstantsProbe {
  std::size_t probes = 0;
  // Largest observed / declared ratio per constant; absent when undeclared.
  std::optional<double> lip_ratio, m2_ratio, g2_ratio, g3_ratio;
  bool pass = true;
};

/// Random finite-difference probes of the declared smoothness constants.
ConstantsProbe probe_constants(const SmoothTestFunction& g, std::uint64_t seed, std::size_t probes = 200,
                               double spread = 3.0);

/// One exact-mode model/statistic paired with whatever specialized structure
/// it has. The target defaults to the exact covariance of F.
struct BoundCheckInstance {
  std::string id;
  ProductModel model;
  StatisticVector statistic;
  std::optional<Matrix> target;
  std::optional<RunsSpec> runs;
  std::optional<QuadFormSpec> quadform;
};

struct BoundCheckRow {
  std::string instance_id;
  std::string function;
  std::string method;
  std::string form;
  double alpha = 0.0;
  double lhs = 0.0;
  double lhs_error = 0.0;
  double total = 0.0;
  double slack = 0.0;
  bool applicable = true;
  std::string status = "ok";
  bool pass = true;
};

struct BoundCheckOptions {
  std::vector<double> alphas{0.0, 0.5, 1.0};
  std::vector<BoundForm> forms{BoundForm::l1, BoundForm::l2, BoundForm::split};
  std::vector<SmoothTestFunction> functions;  // cosine ridge functions when empty
  GaussianParams gaussian;
  unsigned threads = 0;
};

/// Cosine test functions used when none are supplied: a handful of
/// directions and phases with |t|_2 <= 2.
std::vector<SmoothTestFunction> default_cosine_functions(std::size_t d);

/// PASS iff lhs <= total + lhs_error + 1e-9 for every applicable bound.
/// Row order follows instance order, then function, alpha, form, method.
std::vector<BoundCheckRow> bound_check_suite(const std::vector<BoundCheckInstance>& instances,
                                             const BoundCheckOptions& options = {});

}  // namespace mvclt
