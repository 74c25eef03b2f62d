#include <gtest/gtest.h>

#include <cmath>

#include "mvclt/bounds.hpp"
#include "mvclt/corpus.hpp"
#include "mvclt/errors.hpp"
#include "mvclt/verify.hpp"
#include "support.hpp"

using namespace mvclt;

namespace {

SmoothnessConstants unit_cosine() { return make_cosine_family({1.0}, 0.0).constants; }

JointTable x1x2() {
  const auto m = ProductModel::iid(rademacher(), 2);
  return build_joint_table(m, centered_product(m, {0, 1}));
}

}  // namespace

TEST(Bounds, SlepianOnProductOfRademachers) {
  const auto stats = exact_stats(x1x2(), 0.5);
  const GaussianTarget c(Matrix{{1.0}});
  for (BoundForm f : {BoundForm::l1, BoundForm::l2, BoundForm::split}) {
    const auto r = slepian_bound(stats, c, unit_cosine(), f);
    EXPECT_NEAR(r.total, 2.0 / 3.0, 1e-15) << to_string(f);
    EXPECT_NEAR(r.term("third_moment_term"), 2.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(r.constant("B3"), 0.5);
    EXPECT_DOUBLE_EQ(r.constant("B4"), 1.0 / 3.0);
  }
}

TEST(Bounds, SteinOnProductOfRademachers) {
  const auto r = stein_bound(exact_stats(x1x2(), 0.5), GaussianTarget(Matrix{{1.0}}), unit_cosine(), BoundForm::l2);
  // B2 = sqrt(2 pi)/4, sum E|D F|^3 = 2
  EXPECT_NEAR(r.total, std::sqrt(2.0 * M_PI) / 2.0, 1e-14);
  EXPECT_DOUBLE_EQ(r.constant("B1"), 1.0);
  EXPECT_THROW(r.term("nope"), std::out_of_range);
}

TEST(Bounds, SteinRefusesSingularTargetAndL1) {
  const auto m = ProductModel::iid(rademacher(), 2);
  const auto f = stack({centered_sum(m, {1.0, 1.0}), centered_sum(m, {1.0, 1.0})});
  const auto stats = exact_stats(build_joint_table(m, f), 0.5);
  const auto g = make_cosine_family({0.5, 0.5}, 0.0).constants;
  try {
    stein_bound(stats, GaussianTarget(Matrix{{2, 2}, {2, 2}}), g, BoundForm::l2);
    FAIL() << "expected HypothesisError";
  } catch (const HypothesisError& e) {
    EXPECT_EQ(e.code(), "C-not-PD");
  }
  EXPECT_THROW(stein_bound(stats, GaussianTarget(Matrix::identity(2)), g, BoundForm::l1), std::invalid_argument);
  EXPECT_NO_THROW(slepian_bound(stats, GaussianTarget(Matrix{{2, 2}, {2, 2}}), g, BoundForm::l1));
}

TEST(Bounds, MissingConstantsAndShapeMismatch) {
  const auto stats = exact_stats(x1x2(), 0.5);
  SmoothnessConstants none;
  EXPECT_THROW(slepian_bound(stats, GaussianTarget(Matrix{{1.0}}), none, BoundForm::l1), std::invalid_argument);
  EXPECT_THROW(stein_bound(stats, GaussianTarget(Matrix{{1.0}}), none, BoundForm::l2), std::invalid_argument);
  EXPECT_THROW(slepian_bound(stats, GaussianTarget(Matrix::identity(2)), unit_cosine(), BoundForm::l1),
               std::invalid_argument);
}

TEST(Bounds, SlepianL1MatchesOracleAndFormsAreOrdered) {
  for (const auto& inst : identity_corpus(12, 31)) {
    const auto table = centered(build_joint_table(inst.model, inst.statistic));
    const auto space = testing_support::to_oracle(inst.model);
    const Matrix c{{1.0, 0.1}, {0.1, 0.8}};
    const auto g = make_cosine_family({0.6, -0.9}, 0.2).constants;
    const double b3 = *g.g2_inf / 2.0, b4 = *g.g3_inf * 4.0 / 3.0;
    for (double a : {0.0, 0.5, 1.0}) {
      const auto stats = exact_stats(table, a);
      double oracle_total = 0.0;
      for (std::size_t i = 0; i < 2; ++i) {
        const auto ui = testing_support::component(inst.statistic, i);
        oracle_total += b4 * space.third_moment_sum(ui);
        for (std::size_t j = 0; j < 2; ++j) {
          const auto z = space.z_values(ui, testing_support::component(inst.statistic, j), a);
          double e = 0.0;
          for (std::size_t r = 0; r < z.size(); ++r) e += space.weights()[r] * std::abs(c(i, j) - z[r]);
          oracle_total += b3 * e;
        }
      }
      const GaussianTarget t(c);
      const double l1 = slepian_bound(stats, t, g, BoundForm::l1).total;
      EXPECT_NEAR(l1, oracle_total, 1e-11) << inst.id;
      EXPECT_LE(l1, slepian_bound(stats, t, g, BoundForm::split).total + 1e-12);
      EXPECT_LE(l1, slepian_bound(stats, t, g, BoundForm::l2).total + 1e-12);
    }
  }
}

TEST(Bounds, MonteCarloStatsCarryStandardErrors) {
  const auto m = ProductModel({bernoulli(0.4), rademacher(), bernoulli(0.7)});
  const auto f = multilinear_statistic({{1.0, {0, 1}}, {0.5, {1, 2}}}, 3);
  McConfig cfg;
  cfg.outer_samples = 3000;
  const auto stats = mc_stats(mc_estimates(m, f, 0.5, cfg));
  const auto r = slepian_bound(stats, GaussianTarget(Matrix{{0.5}}), unit_cosine(), BoundForm::split);
  ASSERT_TRUE(r.std_error);
  EXPECT_GT(*r.std_error, 0.0);
  EXPECT_EQ(r.mode, EstimationMode::monte_carlo);
  const auto exact = slepian_bound(exact_stats(centered(build_joint_table(m, f)), 0.5), GaussianTarget(Matrix{{0.5}}),
                                   unit_cosine(), BoundForm::split);
  EXPECT_NEAR(r.total, exact.total, 5.0 * *r.std_error);
}
