#include <gtest/gtest.h>

#include <cmath>

#include "mvclt/joint_table.hpp"
#include "mvclt/runs.hpp"
#include "mvclt/verify.hpp"
#include "support.hpp"

using namespace mvclt;

namespace {

SmoothnessConstants g_unit() {
  SmoothnessConstants g;
  g.g2_inf = 1.0;
  g.g3_inf = 1.0;
  return g;
}

RunsSpec mixed_spec() {
  RunsSpec s;
  s.n = 4;
  s.m = {1, 2, 3};
  s.a = {{0.5, -1.0, 0.25, 1.0}, {1.0, 0.5, 0.5, -0.5}, {0.3, 0.2, -0.4, 0.1}};
  const auto law = ComponentDistribution::from_atoms({{-1.0, 0.3}, {0.5, 0.5}, {2.0, 0.2}});
  s.components = {law, bernoulli(0.4), law, rademacher(), bernoulli(0.6), law};
  return s;
}

// F_j = sum_i a_ji (prod of the window - prod of window means), from scratch.
oracle::Scalar runs_component(const RunsSpec& s, std::size_t j, std::vector<double> mu) {
  return [s, j, mu](const oracle::Point& x) {
    double f = 0.0;
    for (std::size_t i = 0; i < s.n; ++i) {
      double px = 1.0, pm = 1.0;
      for (std::size_t t = i; t < i + s.m[j]; ++t) {
        px *= x[t];
        pm *= mu[t];
      }
      f += s.a[j][i] * (px - pm);
    }
    return f;
  };
}

}  // namespace

TEST(Runs, StatisticMatchesDirectSum) {
  const auto s = mixed_spec();
  const auto f = build_runs_statistic(s);
  const auto space = testing_support::to_oracle(runs_model(s));
  std::vector<double> mu;
  for (const auto& c : s.components) mu.push_back(c.mean());
  for (const auto& x : space.points())
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(f.eval(x)[j], runs_component(s, j, mu)(x), 1e-14);
}

TEST(Runs, ExactCovarianceMatchesEnumeration) {
  const auto s = mixed_spec();
  const auto space = testing_support::to_oracle(runs_model(s));
  std::vector<double> mu;
  for (const auto& c : s.components) mu.push_back(c.mean());
  const Matrix c = runs_exact_covariance(s);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      EXPECT_NEAR(c(i, j), space.covariance(runs_component(s, i, mu), runs_component(s, j, mu)), 1e-13);
}

TEST(Runs, ClosedFormsAgreeWithGenericOperators) {
  const auto s = mixed_spec();
  const auto model = runs_model(s);
  const auto f = build_runs_statistic(s);
  ASSERT_TRUE(f.closed_diff);
  ASSERT_TRUE(f.closed_cond_diff);
  const auto table = build_joint_table(model, f);
  for (std::size_t k = 0; k < model.size(); ++k)
    for (std::size_t j = 0; j < 3; ++j) {
      const auto u = table.component(j);
      const auto big = diff_D(u, k);
      const auto past = cond_exp(big, k + 1, Filtration::past);
      const auto future = cond_exp(big, k, Filtration::future);
      for (std::size_t r = 0; r < table.rows(); ++r) {
        const auto x = table.layout().assignment(r);
        EXPECT_NEAR(f.closed_diff(k, x)[j], big[r], 1e-13);
        EXPECT_NEAR(f.closed_cond_diff(k, x, Filtration::past)[j], past[r], 1e-13);
        EXPECT_NEAR(f.closed_cond_diff(k, x, Filtration::future)[j], future[r], 1e-13);
      }
    }
}

TEST(Runs, BernoulliAnchor) {
  const auto r = runs_bound(bernoulli_runs_spec(100, 1, 0.5), g_unit());
  EXPECT_NEAR(r.total, 0.1747547, 1e-6);
  EXPECT_NEAR(r.total, oracle::bernoulli_runs_bound(100, 1, 0.5, 1.0, 1.0), 1e-14);
  EXPECT_NEAR(r.term("variance_term"), std::sqrt(2.0) / 10.0, 1e-15);
  EXPECT_NEAR(r.term("third_moment_term"), 1.0 / 30.0, 1e-15);
  EXPECT_EQ(r.method, BoundMethod::runs);
  EXPECT_DOUBLE_EQ(r.alpha, 1.0);
}

TEST(Runs, BernoulliGridMatchesClosedForm) {
  for (std::size_t n : {10, 100, 1000})
    for (std::size_t d : {1, 2, 3})
      for (double p : {0.3, 0.5, 0.7}) {
        const double total = runs_bound(bernoulli_runs_spec(n, d, p), g_unit()).total;
        EXPECT_NEAR(total, oracle::bernoulli_runs_bound(n, d, p, 1.0, 1.0), 1e-12 * total);
        EXPECT_LE(total, improved_bernoulli_bound(n, d, p, 1.0, 1.0));
      }
}

TEST(Runs, ComparisonConstants) {
  EXPECT_EQ(reinert_rollin_bound(100, 1, 0.5, 1.0, 1.0), 550.4);
  EXPECT_NEAR(improved_bernoulli_bound(100, 1, 0.5, 1.0, 1.0), (2.0 * std::sqrt(2.0) + 2.0 / 3.0) / 2.5, 1e-14);
  EXPECT_NEAR(improved_bernoulli_bound(100, 1, 0.5, 1.0, 1.0), 1.39804, 1e-5);
  EXPECT_THROW(reinert_rollin_bound(100, 1, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST(Runs, SigmaFormulaIsTheLargeNLimit) {
  const Matrix lim = bernoulli_sigma_formula(3, 0.4);
  const Matrix small = runs_exact_covariance(bernoulli_runs_spec(50, 3, 0.4));
  const Matrix large = runs_exact_covariance(bernoulli_runs_spec(5000, 3, 0.4));
  EXPECT_LT(max_abs(large - lim), max_abs(small - lim));
  EXPECT_LT(max_abs(large - lim), 1e-3);
  // d = 1: variance p(1-p) / (p(1-p)) = 1 at every n.
  EXPECT_NEAR(runs_exact_covariance(bernoulli_runs_spec(7, 1, 0.3))(0, 0), 1.0, 1e-14);
}

TEST(Runs, SuiteCrossChecksByEnumeration) {
  const auto s = bernoulli_runs_suite(8, 2, 0.5, g_unit());
  ASSERT_TRUE(s.sigma_enumerated);
  EXPECT_LE(max_abs(*s.sigma_enumerated - s.sigma_exact), 1e-13);
  EXPECT_TRUE(s.specialized_within_improved);
  EXPECT_TRUE(s.improved_within_reinert_rollin);
  EXPECT_TRUE(s.improved_expected_to_win);
}

TEST(Runs, VarianceBoundDominatesExactVariance) {
  const auto s = bernoulli_runs_spec(5, 2, 0.5);
  const auto table = build_joint_table(runs_model(s), build_runs_statistic(s));
  const auto z = z_alpha_moments(table, 1.0);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_LE(z.variance(i, j), runs_variance_bound(s, i, j) + 1e-12);
}

TEST(Runs, ValidationErrors) {
  auto s = mixed_spec();
  s.m = {2, 1, 3};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = mixed_spec();
  s.a[0].pop_back();
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = mixed_spec();
  s.components.pop_back();
  EXPECT_THROW(s.validate(), std::invalid_argument);
}
