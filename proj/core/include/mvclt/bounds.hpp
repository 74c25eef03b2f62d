#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mvclt/joint_table.hpp"
#include "mvclt/linalg.hpp"
#include "mvclt/matrix.hpp"
#include "mvclt/monte_carlo.hpp"
#include "mvclt/smooth_function.hpp"

namespace mvclt {

enum class BoundMethod { stein, slepian, rademacher_d2, rademacher_d3, runs, quadratic_form };
// l2: (sum E|C - Z|^2)^{1/2} assembly; l1: sum E|C - Z|; split: covariance
// mismatch and sqrt(Var Z) reported separately.
enum class BoundForm { l2, l1, split };
enum class EstimationMode { exact, monte_carlo };

const char* to_string(BoundMethod m);
const char* to_string(BoundForm f);
const char* to_string(EstimationMode m);

struct NamedValue {
  std::string name;
  double value = 0.0;
  std::optional<double> std_error;
};

struct BoundReport {
  BoundMethod method = BoundMethod::slepian;
  BoundForm form = BoundForm::split;
  double alpha = 0.5;
  EstimationMode mode = EstimationMode::exact;
  std::vector<NamedValue> terms;
  std::vector<NamedValue> constants;
  double total = 0.0;
  std::optional<double> std_error;
  bool bias_caveat = false;
  std::string note;

  double term(const std::string& name) const;     // throws std::out_of_range
  double constant(const std::string& name) const;  // throws std::out_of_range
};

/// Everything the generic bounds need from F, either exact or estimated.
struct BoundStats {
  EstimationMode mode = EstimationMode::exact;
  double alpha = 0.5;
  std::size_t dim = 0;
  Matrix sigma;   // covariance of F (equals E[Z])
  Matrix z_mean;
  Matrix z_var;
  std::vector<double> third_moment;  // per i: sum_k E|D_k F_i|^3
  std::shared_ptr<const ZAlpha> z;   // exact mode: realized Z tables

  // Monte Carlo standard errors.
  std::optional<Matrix> sigma_se, z_mean_se, z_var_se;
  std::optional<std::vector<double>> third_moment_se;
  bool bias_caveat = false;

  // E|C_ij - Z_ij|^2 and E|C_ij - Z_ij|. In Monte Carlo mode the latter is
  // replaced by its upper bound sqrt(E|C_ij - Z_ij|^2).
  Matrix l2_mismatch(const Matrix& c) const;
  Matrix l1_mismatch(const Matrix& c) const;
};

BoundStats exact_stats(const JointTable& table, double alpha);
BoundStats mc_stats(const McEstimates& est);

/// Stein-method bound for g with finite ||g||_Lip and M_2(g); needs C
/// positive definite (throws HypothesisError "C-not-PD" otherwise).
///   B1 = ||C^-1|| ||C||^{1/2} ||g||_Lip
///   B2 = sqrt(2 pi)/4 ||C^-1||^{3/2} ||C|| M_2(g) d^2
/// l2 form: B1 (sum E|C-Z|^2)^{1/2} + B2 sum E|D F|^3
/// split:   B1 sum|C - sigma| + B1 sum sqrt(Var Z) + B2 sum E|D F|^3
BoundReport stein_bound(const BoundStats& stats, const GaussianTarget& target, const SmoothnessConstants& g,
                        BoundForm form);

/// Interpolation bound for g in C^3, any PSD C.
///   B3 = ||g''|| / 2,  B4 = ||g'''|| d^2 / 3
/// l1 form: B3 sum E|C-Z| + B4 sum E|D F|^3
/// split:   B3 sum|C - sigma| + B3 sum sqrt(Var Z) + B4 sum E|D F|^3
BoundReport slepian_bound(const BoundStats& stats, const GaussianTarget& target, const SmoothnessConstants& g,
                          BoundForm form);

inline constexpr double kSqrtTwoPi = 2.50662827463100050241576528481104525;

}  // namespace mvclt
