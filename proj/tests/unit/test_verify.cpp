#include <gtest/gtest.h>

#include <cmath>

#include "mvclt/corpus.hpp"
#include "mvclt/verify.hpp"
#include "support.hpp"

using namespace mvclt;

TEST(Cosine, ConstantsAndGaussianMean) {
  const auto g = make_cosine_family({1.0}, 0.0);
  EXPECT_NEAR(g.gaussian_mean(Matrix{{1.0}}), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(make_cosine_family({1.0}, M_PI / 2).gaussian_mean(Matrix{{2.5}}), 0.0, 1e-15);
  EXPECT_NEAR(make_cosine_family({1.0, 1.0}, 0.0).gaussian_mean(Matrix::identity(2)), std::exp(-1.0), 1e-15);
  const auto h = make_cosine_family({0.5, -2.0}, 0.1);
  EXPECT_DOUBLE_EQ(*h.constants.lip, std::sqrt(4.25));
  EXPECT_DOUBLE_EQ(*h.constants.m2, 4.25);
  EXPECT_DOUBLE_EQ(*h.constants.g2_inf, 4.0);
  EXPECT_DOUBLE_EQ(*h.constants.g3_inf, 8.0);
  EXPECT_EQ(h.dim, 2u);
}

TEST(Cosine, DeclaredConstantsSurviveProbes) {
  for (const auto& g : default_cosine_functions(3)) {
    const auto p = probe_constants(g, 7);
    EXPECT_TRUE(p.pass) << g.name;
    EXPECT_LE(*p.g2_ratio, 1.0 + 1e-6);
    EXPECT_LE(*p.g3_ratio, 1.0 + 1e-6);
  }
}

TEST(Cosine, UnderstatedConstantIsCaught) {
  auto g = make_cosine_family({2.0}, 0.3);
  g.constants.g2_inf = 1.0;
  EXPECT_FALSE(probe_constants(g, 7).pass);
}

TEST(GaussianExpectation, QuadratureMatchesAnalytic) {
  std::vector<double> x, w;
  gauss_hermite(10, x, w);
  double s = 0.0;
  for (double v : w) s += v;
  EXPECT_NEAR(s, std::sqrt(M_PI), 1e-13);

  const auto g = make_cosine_family({1.0}, 0.0);
  const auto q = gaussian_expectation(g, GaussianTarget(Matrix{{1.0}}), GaussianMethod::quadrature);
  EXPECT_NEAR(q.value, 0.60653066, 1e-8);
  EXPECT_NEAR(q.value, std::exp(-0.5), 1e-12);
  for (const auto& t : std::vector<std::vector<double>>{{4.0, 0.0}, {1.5, -2.0}, {0.3, 0.2}}) {
    const Matrix c{{1.0, 0.3}, {0.3, 0.7}};
    const auto h = make_cosine_family(t, 0.25);
    const auto quad = gaussian_expectation(h, GaussianTarget(c), GaussianMethod::quadrature);
    EXPECT_NEAR(quad.value, oracle::cosine_gaussian_mean(t, 0.25, {{1.0, 0.3}, {0.3, 0.7}}), 1e-10);
  }
}

TEST(GaussianExpectation, SingularTargetAndQuadratic) {
  const auto h = make_cosine_family({1.0, 0.5}, 0.0);
  const GaussianTarget singular(Matrix{{1, 1}, {1, 1}});
  const auto quad = gaussian_expectation(h, singular, GaussianMethod::quadrature);
  EXPECT_NEAR(quad.value, oracle::cosine_gaussian_mean({1.0, 0.5}, 0.0, {{1, 1}, {1, 1}}), 1e-12);
  const auto q = make_quadratic_function(Matrix::identity(2));
  EXPECT_NEAR(gaussian_expectation(q, GaussianTarget(Matrix::identity(2)), GaussianMethod::analytic).value, 2.0, 1e-15);
  EXPECT_NEAR(gaussian_expectation(q, GaussianTarget(Matrix::identity(2)), GaussianMethod::quadrature).value, 2.0, 1e-10);
}

TEST(GaussianExpectation, UnavailableMethodsThrow) {
  SmoothTestFunction g;
  g.dim = 4;
  g.eval = [](std::span<const double> x) { return std::cos(x[0] + x[1] + x[2] + x[3]); };
  EXPECT_THROW(gaussian_expectation(g, GaussianTarget(Matrix::identity(4)), GaussianMethod::analytic),
               std::invalid_argument);
  EXPECT_THROW(gaussian_expectation(g, GaussianTarget(Matrix::identity(4)), GaussianMethod::quadrature),
               std::invalid_argument);
}

TEST(GaussianExpectation, MonteCarloIsDeterministic) {
  const auto g = make_cosine_family({0.7, 0.2}, 0.0);
  GaussianParams p;
  p.mc.outer_samples = 5000;
  p.mc.seed = 3;
  const GaussianTarget t(Matrix::identity(2));
  const auto a = gaussian_expectation(g, t, GaussianMethod::monte_carlo, p);
  const auto b = gaussian_expectation(g, t, GaussianMethod::monte_carlo, p);
  EXPECT_EQ(a.value, b.value);
  EXPECT_NEAR(a.value, oracle::cosine_gaussian_mean({0.7, 0.2}, 0.0, {{1, 0}, {0, 1}}), 5.0 * a.error);
}

TEST(Discrepancy, Anchors) {
  const auto m2 = ProductModel::iid(rademacher(), 2);
  const auto g = make_cosine_family({1.0}, 0.0);
  const GaussianTarget one(Matrix{{1.0}});
  const auto x1x2 = discrepancy(m2, centered_product(m2, {0, 1}), g, one, EstimationMode::exact);
  EXPECT_NEAR(x1x2.lhs, std::abs(std::cos(1.0) - std::exp(-0.5)), 1e-15);
  EXPECT_NEAR(x1x2.lhs, 0.0662284, 1e-7);

  const auto m4 = ProductModel::iid(rademacher(), 4);
  const auto s = discrepancy(m4, centered_sum(m4, {0.5, 0.5, 0.5, 0.5}), g, one, EstimationMode::exact);
  const double egf = (2.0 * std::cos(2.0) + 8.0 * std::cos(1.0) + 6.0) / 16.0;
  EXPECT_NEAR(s.statistic_side.value, egf, 1e-15);
  EXPECT_NEAR(s.lhs, std::exp(-0.5) - egf, 1e-15);
  EXPECT_GE(s.lhs, 0.0);
}

TEST(Discrepancy, ExactModeRefusesSamplerModels) {
  const ProductModel m({standard_normal()});
  EXPECT_THROW(discrepancy(m, centered_sum(m, {1.0}), make_cosine_family({1.0}, 0.0), GaussianTarget(Matrix{{1.0}}),
                           EstimationMode::exact),
               std::invalid_argument);
}

TEST(Discrepancy, MonteCarloCoversTheExactValue) {
  const auto m = ProductModel({bernoulli(0.3), rademacher(), bernoulli(0.6)});
  const auto f = centered_sum(m, {1.0, 0.5, -1.0});
  const auto g = make_cosine_family({0.9}, 0.2);
  const GaussianTarget t(Matrix{{1.0}});
  GaussianParams p;
  p.mc.outer_samples = 20000;
  p.mc.seed = 1;
  const auto exact = discrepancy(m, f, g, t, EstimationMode::exact, p);
  const auto mc = discrepancy(m, f, g, t, EstimationMode::monte_carlo, p);
  EXPECT_NEAR(mc.statistic_side.value, exact.statistic_side.value, 4.0 * mc.statistic_side.error);
}

TEST(BoundCheckSuite, AnchorsPass) {
  std::vector<BoundCheckInstance> insts;
  const auto m2 = ProductModel::iid(rademacher(), 2);
  insts.push_back({"x1x2", m2, centered_product(m2, {0, 1}), Matrix{{1.0}}, std::nullopt, std::nullopt});
  BoundCheckOptions opt;
  opt.functions = {make_cosine_family({1.0}, 0.0)};
  opt.alphas = {0.5};
  const auto rows = bound_check_suite(insts, opt);
  bool saw = false;
  for (const auto& r : rows) {
    EXPECT_TRUE(r.pass) << r.method << " " << r.form;
    if (r.method == "slepian" && r.form == "l1") {
      saw = true;
      EXPECT_NEAR(r.lhs, 0.0662284, 1e-7);
      EXPECT_NEAR(r.total, 2.0 / 3.0, 1e-15);
      EXPECT_NEAR(r.slack, 0.6004383, 1e-7);
    }
  }
  EXPECT_TRUE(saw);
}

TEST(BoundCheckSuite, RowOrderIndependentOfThreads) {
  auto insts = runs_instances();
  BoundCheckOptions opt;
  opt.threads = 1;
  const auto a = bound_check_suite(insts, opt);
  opt.threads = 4;
  const auto b = bound_check_suite(insts, opt);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].instance_id, b[i].instance_id);
    EXPECT_EQ(a[i].method, b[i].method);
    EXPECT_EQ(a[i].total, b[i].total);
    EXPECT_EQ(a[i].lhs, b[i].lhs);
  }
}

TEST(BoundCheckSuite, UncenteredStatisticsAreCentered) {
  const auto m = ProductModel({bernoulli(0.3), bernoulli(0.8)});
  std::vector<BoundCheckInstance> insts{
      {"raw", m, multilinear_statistic({{1.0, {0, 1}}, {2.0, {}}}, 2), std::nullopt, std::nullopt, std::nullopt}};
  for (const auto& r : bound_check_suite(insts)) EXPECT_TRUE(r.pass) << r.method << " " << r.function;
}
