#pragma once

#include <optional>
#include <vector>

#include "mvclt/bounds.hpp"
#include "mvclt/distribution.hpp"
#include "mvclt/matrix.hpp"
#include "mvclt/model.hpp"

namespace mvclt {

/// A vector of m-run statistics
///   F^(m_j) = sum_{i=1}^n a^(j)_i (X_i ... X_{i+m_j-1} - mu_i ... mu_{i+m_j-1})
/// over n + m_d - 1 independent coordinates.
struct RunsSpec {
  std::size_t n = 0;
  std::vector<std::size_t> m;                   // nondecreasing window lengths
  std::vector<std::vector<double>> a;           // a[j][i], i < n
  std::vector<ComponentDistribution> components;  // n + m.back() - 1 laws

  std::size_t dim() const { return m.size(); }
  std::size_t coordinates() const { return n + m.back() - 1; }
  // Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

ProductModel runs_model(const RunsSpec& spec);

/// Direct-summation evaluator with closed-form D_k and its past/future
/// conditional expectations.
StatisticVector build_runs_statistic(const RunsSpec& spec);

struct RunsMomentMaxima {
  double x1 = 0.0;  // max E|X_i|^3
  double x2 = 0.0;  // max E|X_i - mu_i|^3
  double y1 = 0.0;  // max E|X_i|^4
  double y2 = 0.0;  // max E|X_i - mu_i|^4
};

RunsMomentMaxima runs_moment_maxima(const RunsSpec& spec);

/// sqrt(2) g2 d sum_i m_i^3 sqrt(y1^{m_i-1} y2 sum_k a_k^4)
///   + g3 d^2 / 3 sum_i m_i^3 x1^{m_i-1} x2 sum_k |a_k|^3
/// against the Gaussian with the exact covariance of F.
BoundReport runs_bound(const RunsSpec& spec, const SmoothnessConstants& g);

/// Exact covariance of F for any n from pairwise window moments.
Matrix runs_exact_covariance(const RunsSpec& spec);

/// 2 (m_i^6 y1^{m_i-1} y2 sum a_i^4 + m_j^6 y1^{m_j-1} y2 sum a_j^4), an
/// upper bound for Var(Z_ij) at alpha = 1.
double runs_variance_bound(const RunsSpec& spec, std::size_t i, std::size_t j);

/// W_j = sum_i (X_i ... X_{i+j-1} - p^j) / sqrt(n p^j (1 - p)), j = 1..d,
/// with Bernoulli(p) inputs.
RunsSpec bernoulli_runs_spec(std::size_t n, std::size_t d, double p);

/// Large-n covariance of W: p^{|i-j|/2} sum_{k=0}^{min(i,j)-1} (|i-j| + 1 + 2k) p^k.
Matrix bernoulli_sigma_formula(std::size_t d, double p);

/// (416 d^{7/2} g2 + 960 d^5 g3) / (p^{d/2} (1-p)^{3/2} sqrt(n))
double reinert_rollin_bound(std::size_t n, std::size_t d, double p, double g2, double g3);

/// (2 sqrt(2) d^4 g2 + 2/3 d^5 g3) / (p^{d/2} (1-p)^{3/2} sqrt(n))
double improved_bernoulli_bound(std::size_t n, std::size_t d, double p, double g2, double g3);

struct BernoulliRunsSuite {
  Matrix sigma_formula;
  Matrix sigma_exact;                     // finite-n covariance, window sums
  std::optional<Matrix> sigma_enumerated;  // by full enumeration when small
  double formula_gap = 0.0;               // max |sigma_formula - sigma_exact|
  double improved_bound = 0.0;
  double reinert_rollin = 0.0;
  BoundReport specialized;
  bool specialized_within_improved = false;
  bool improved_within_reinert_rollin = false;
  bool improved_expected_to_win = false;  // 2 sqrt(2) d^4 <= 416 d^{7/2}
};

BernoulliRunsSuite bernoulli_runs_suite(std::size_t n, std::size_t d, double p, const SmoothnessConstants& g,
                                        std::uint64_t enumeration_cap = std::uint64_t{1} << 16);

}  // namespace mvclt
