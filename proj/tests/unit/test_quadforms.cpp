#include <gtest/gtest.h>

#include <cmath>

#include "mvclt/joint_table.hpp"
#include "mvclt/quadforms.hpp"
#include "mvclt/rng.hpp"
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

Matrix random_qf_matrix(std::size_t n, RandomStream& rng, double density = 1.0) {
  Matrix a(n, n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (rng.uniform() < density) a(u, v) = a(v, u) = 2.0 * rng.uniform() - 1.0;
  return a;
}

std::vector<std::vector<double>> rows_of(const Matrix& m) {
  std::vector<std::vector<double>> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

}  // namespace

TEST(QuadForms, TwoByTwoAnchor) {
  const auto spec = make_quadform_spec({Matrix{{0, 1}, {1, 0}}}, {rademacher(), rademacher()});
  const auto r = qf_bound(spec, GaussianTarget(Matrix{{1.0}}), g_unit());
  EXPECT_NEAR(r.term("covariance_mismatch"), 0.0, 1e-15);
  EXPECT_NEAR(r.term("Z_star_variance"), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(r.term("Z_ast_variance"), 0.0, 1e-15);
  EXPECT_NEAR(r.term("third_moment"), 4.0 * std::sqrt(2.0) / 3.0, 1e-15);
  EXPECT_NEAR(r.total, 2.59272, 1e-5);
  SmoothnessConstants zero;
  zero.g2_inf = 0.0;
  zero.g3_inf = 0.0;
  EXPECT_EQ(qf_bound(spec, GaussianTarget(Matrix{{1.0}}), zero).total, 0.0);
}

TEST(QuadForms, BoundMatchesOracleOnRandomMatrices) {
  RandomStream rng(12, 0);
  for (std::size_t n : {3, 6, 11, 20}) {
    const Matrix a = random_qf_matrix(n, rng);
    const auto law = standardized_two_point(0.3);
    const auto spec = make_quadform_spec({a}, std::vector<ComponentDistribution>(n, law));
    const double c = 1.3;
    const double got = qf_bound(spec, GaussianTarget(Matrix{{c}}), g_unit()).total;
    const double want =
        oracle::qf_bound_1d(rows_of(a), law.variance_of_square(), law.abs_moment(4), c, 1.0, 1.0);
    EXPECT_NEAR(got, want, 1e-12 * want) << n;
  }
}

TEST(QuadForms, MomentSwitchoverInStarTerm) {
  // Var X = 1 and Var(X^2) = 5, so the star term scales by sqrt(5/2).
  const auto heavy = ComponentDistribution::from_atoms(
      {{-std::sqrt(6.0), 1.0 / 12.0}, {0.0, 5.0 / 6.0}, {std::sqrt(6.0), 1.0 / 12.0}});
  ASSERT_NEAR(heavy.variance(), 1.0, 1e-12);
  const double vs = heavy.variance_of_square();
  ASSERT_GT(vs, 2.0);
  const Matrix a{{0, 1}, {1, 0}};
  const auto light = make_quadform_spec({a}, {rademacher(), rademacher()});
  const auto h = make_quadform_spec({a}, {heavy, heavy});
  const double ratio = qf_bound(h, GaussianTarget(Matrix{{1.0}}), g_unit()).term("Z_star_variance") /
                       qf_bound(light, GaussianTarget(Matrix{{1.0}}), g_unit()).term("Z_star_variance");
  EXPECT_NEAR(ratio, std::sqrt(vs / 2.0), 1e-13);
}

TEST(QuadForms, ConditionsMatchOracle) {
  RandomStream rng(4, 4);
  for (std::size_t n : {2, 9, 33, 64}) {
    const Matrix a = random_qf_matrix(n, rng, 0.6), b = random_qf_matrix(n, rng, 0.6);
    const auto spec = make_quadform_spec({a, b}, std::vector<ComponentDistribution>(n, rademacher()));
    const auto cond = qf_conditions(spec, Matrix::identity(2));
    const auto ra = rows_of(a), rb = rows_of(b);
    EXPECT_NEAR(cond.trace_condition(0, 1), oracle::trace_condition(ra, rb), 1e-9);
    EXPECT_NEAR(cond.trace_condition(0, 0), oracle::trace_condition(ra, ra), 1e-9);
    EXPECT_LE(cond.trace_route_gap, 1e-9);
    const Matrix a2 = a * a;
    EXPECT_NEAR(cond.dejong_tr_a4[0], trace(a2 * a2), 1e-9 * std::max(1.0, trace(a2 * a2)));
    double pc = 0.0;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v) pc += a(u, v) * b(u, v);
    EXPECT_NEAR(cond.pairwise_covariance(0, 1), pc, 1e-12);
  }
  const auto two = make_quadform_spec({Matrix{{0, 1}, {1, 0}}}, {rademacher(), rademacher()});
  const auto c2 = qf_conditions(two, Matrix{{1.0}});
  EXPECT_DOUBLE_EQ(c2.dejong_tr_a4[0], 2.0);
  EXPECT_DOUBLE_EQ(c2.trace_condition(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(c2.pairwise_covariance(0, 0), 1.0);
}

TEST(QuadForms, EqualMatricesGiveEqualConditionEntries) {
  RandomStream rng(8, 1);
  const Matrix a = random_qf_matrix(7, rng);
  const auto spec = make_quadform_spec({a, a}, std::vector<ComponentDistribution>(7, rademacher()));
  const auto c = qf_conditions(spec, Matrix::identity(2));
  EXPECT_NEAR(c.trace_condition(0, 1), c.trace_condition(0, 0), 1e-12);
  EXPECT_NEAR(c.pairwise_covariance(0, 1), c.pairwise_covariance(1, 1), 1e-12);
}

TEST(QuadForms, ClosedDiffAndZDecomposition) {
  RandomStream rng(2, 2);
  const std::size_t n = 5;
  const auto law = standardized_two_point(0.25);
  const auto spec = make_quadform_spec({random_qf_matrix(n, rng), random_qf_matrix(n, rng)},
                                       std::vector<ComponentDistribution>(n, law));
  const auto f = build_quadratic_form(spec);
  const auto table = build_joint_table(quadform_model(spec), f);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < 2; ++i) {
      const auto big = diff_D(table.component(i), k);
      for (std::size_t r = 0; r < table.rows(); ++r)
        EXPECT_NEAR(f.closed_diff(k, table.layout().assignment(r))[i], big[r], 1e-12);
    }
  const auto dec = qf_z_decomposition(table, spec);
  const auto z = z_alpha_moments(table, 0.5);
  for (std::size_t i = 0; i < 4; ++i)
    EXPECT_LE(max_abs_difference(z.tables[i], 0.5 * (dec.ast[i] + dec.star[i])), 1e-10);
}

TEST(QuadForms, RademacherInputsKillTheAstPart) {
  RandomStream rng(6, 0);
  const auto spec = make_quadform_spec({random_qf_matrix(6, rng)}, std::vector<ComponentDistribution>(6, rademacher()));
  const auto table = build_joint_table(quadform_model(spec), build_quadratic_form(spec));
  const auto dec = qf_z_decomposition(table, spec);
  for (double v : dec.ast[0].values()) EXPECT_EQ(v, 0.0);
  EXPECT_NEAR(z_alpha_moments(table, 0.5).variance(0, 0), 0.25 * dec.star[0].variance(), 1e-12);
}

TEST(QuadForms, ZeroMatrixGivesZeroStatistic) {
  const auto spec = make_quadform_spec({Matrix(3, 3)}, std::vector<ComponentDistribution>(3, rademacher()));
  const auto table = build_joint_table(quadform_model(spec), build_quadratic_form(spec));
  for (std::size_t r = 0; r < table.rows(); ++r) EXPECT_EQ(table.value(r, 0), 0.0);
  const auto c = qf_conditions(spec, Matrix{{0.0}});
  EXPECT_EQ(c.trace_condition(0, 0), 0.0);
  EXPECT_EQ(c.dejong_tr_a4[0], 0.0);
}

TEST(QuadForms, ValidationAndSymmetrization) {
  EXPECT_THROW(make_quadform_spec({Matrix{{1, 1}, {1, 0}}}, {rademacher(), rademacher()}), std::invalid_argument);
  EXPECT_THROW(make_quadform_spec({Matrix{{0, 1}, {1, 0}}}, {bernoulli(0.5), rademacher()}), std::invalid_argument);
  std::vector<std::string> warnings;
  const Matrix s = symmetrize_upper(Matrix{{0, 2}, {0, 0}}, &warnings);
  EXPECT_EQ(s, (Matrix{{0, 2}, {2, 0}}));
  EXPECT_TRUE(warnings.empty());
  const Matrix t = symmetrize_upper(Matrix{{0, 2}, {1, 0}}, &warnings);
  EXPECT_EQ(t, (Matrix{{0, 2}, {2, 0}}));
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(QuadForms, TridiagonalSweepRate) {
  std::vector<std::size_t> grid;
  for (std::size_t n = 16; n <= 1024; n *= 2) grid.push_back(n);
  const auto sweep = qf_clt_sweep(tridiagonal_family, Matrix{{1.0}}, g_unit(), grid);
  ASSERT_TRUE(sweep.slope);
  EXPECT_GE(*sweep.slope, -0.6);
  EXPECT_LE(*sweep.slope, -0.4);
  EXPECT_TRUE(sweep.converging);
  EXPECT_TRUE(sweep.failures.empty());
  for (std::size_t i = 1; i < sweep.rows.size(); ++i) EXPECT_LT(sweep.rows[i].report.total, sweep.rows[i - 1].report.total);
  // Direct evaluation of the four terms for the small members.
  for (const auto& row : sweep.rows) {
    if (row.n > 128) continue;
    const auto spec = tridiagonal_family(row.n);
    EXPECT_NEAR(row.report.total, oracle::qf_bound_1d(rows_of(spec.a[0]), 0.0, 1.0, 1.0, 1.0, 1.0), 1e-12);
  }
}

TEST(QuadForms, SingleRowFamilyIsFlaggedNonConvergent) {
  const auto sweep = qf_clt_sweep(single_row_family, Matrix{{1.0}}, g_unit(), {8, 32, 128, 512});
  EXPECT_FALSE(sweep.converging);
  for (const auto& row : sweep.rows) EXPECT_NEAR(row.row_max, 1.0, 1e-12);
}

TEST(QuadForms, SweepRecordsFamilyFailures) {
  const QfFamily bad = [](std::size_t n) {
    if (n == 5) throw std::invalid_argument("no member at 5");
    return tridiagonal_family(n);
  };
  const auto sweep = qf_clt_sweep(bad, Matrix{{1.0}}, g_unit(), {4, 5, 6});
  EXPECT_EQ(sweep.rows.size(), 2u);
  EXPECT_EQ(sweep.failures.size(), 1u);
}

TEST(QuadForms, LogLogSlope) {
  EXPECT_NEAR(*log_log_slope({1, 4, 16}, {1, 0.5, 0.25}), -0.5, 1e-14);
  EXPECT_FALSE(log_log_slope({1}, {1}));
}
