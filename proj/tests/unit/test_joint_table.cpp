#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mvclt/corpus.hpp"
#include "mvclt/errors.hpp"
#include "mvclt/joint_table.hpp"
#include "support.hpp"

using namespace mvclt;
using testing_support::component;
using testing_support::to_oracle;

namespace {

struct Fixture {
  ProductModel model;
  StatisticVector f;
};

Fixture mixed_instance() {
  ProductModel m({ComponentDistribution::from_atoms({{-1.0, 0.2}, {0.5, 0.5}, {2.0, 0.3}}), rademacher(),
                  ComponentDistribution::from_atoms({{0.0, 0.6}, {1.5, 0.4}})});
  StatisticVector f;
  f.dim = 2;
  f.eval = [](std::span<const double> x) {
    return std::vector<double>{x[0] * x[1] + 0.5 * x[2] - x[0] * x[1] * x[2], x[0] * x[0] - x[2] + x[1]};
  };
  f.name = "mixed";
  return {m, f};
}

}  // namespace

TEST(JointTable, LayoutMatchesOracleEnumeration) {
  const auto fx = mixed_instance();
  const auto table = build_joint_table(fx.model, fx.f);
  const auto space = to_oracle(fx.model);
  ASSERT_EQ(table.rows(), space.points().size());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    EXPECT_EQ(table.layout().assignment(r), space.points()[r]);
    EXPECT_NEAR(table.layout().weight(r), space.weights()[r], 1e-15);
  }
}

TEST(JointTable, OperatorsMatchOracle) {
  const auto fx = mixed_instance();
  const auto table = build_joint_table(fx.model, fx.f);
  const auto space = to_oracle(fx.model);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto u = table.component(i);
    const auto ou = component(fx.f, i);
    for (std::size_t k = 0; k < space.n(); ++k) {
      const auto big = diff_D(u, k);
      const auto small = diff_d(u, k);
      const auto past = cond_exp(u, k + 1, Filtration::past);
      const auto future = cond_exp(u, k, Filtration::future);
      const auto obig = space.big_d(ou, k);
      const auto osmall = space.small_d(ou, k);
      for (std::size_t r = 0; r < table.rows(); ++r) {
        const auto& x = space.points()[r];
        EXPECT_NEAR(big[r], obig(x), 1e-13);
        EXPECT_NEAR(small[r], osmall(x), 1e-13);
        EXPECT_NEAR(past[r], space.conditional(ou, x, space.past_mask(k)), 1e-13);
        EXPECT_NEAR(future[r], space.conditional(ou, x, space.future_mask(k)), 1e-13);
        for (double a : {0.0, 0.3, 1.0}) EXPECT_NEAR(d_alpha(u, k, a)[r], space.d_alpha(ou, k, a, x), 1e-13);
      }
    }
  }
}

TEST(JointTable, CondExpBoundaries) {
  const auto fx = mixed_instance();
  const auto u = build_joint_table(fx.model, fx.f).component(0);
  const double mean = u.expectation();
  const std::size_t n = fx.model.size();
  const auto past0 = cond_exp(u, 0, Filtration::past);
  const auto future_n = cond_exp(u, n, Filtration::future);
  for (double v : past0.values()) EXPECT_NEAR(v, mean, 1e-14);
  for (double v : future_n.values()) EXPECT_NEAR(v, mean, 1e-14);
  EXPECT_LE(max_abs_difference(cond_exp(u, n, Filtration::past), u), 1e-15);
  EXPECT_LE(max_abs_difference(cond_exp(u, 0, Filtration::future), u), 1e-15);
  EXPECT_THROW(cond_exp(u, n + 1, Filtration::past), std::out_of_range);
}

TEST(JointTable, ZAlphaMomentsMatchOracle) {
  const auto fx = mixed_instance();
  const auto table = build_joint_table(fx.model, fx.f);
  const auto space = to_oracle(fx.model);
  for (double a : {0.0, 0.25, 0.5, 1.0}) {
    const auto z = z_alpha_moments(table, a);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        const auto oz = space.z_values(component(fx.f, i), component(fx.f, j), a);
        EXPECT_NEAR(z.mean(i, j), space.mean_of(oz), 1e-12);
        EXPECT_NEAR(z.variance(i, j), space.variance_of(oz), 1e-12);
        EXPECT_NEAR(z.mean(i, j), space.covariance(component(fx.f, i), component(fx.f, j)), 1e-12);
        for (std::size_t r = 0; r < table.rows(); ++r) EXPECT_NEAR(z.table(i, j)[r], oz[r], 1e-12);
      }
  }
}

TEST(JointTable, ThirdMomentAndMomentsMatchOracle) {
  const auto fx = mixed_instance();
  const auto table = build_joint_table(fx.model, fx.f);
  const auto space = to_oracle(fx.model);
  const auto third = third_abs_moment_sum(table);
  const auto mom = moments(table);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(third[i], space.third_moment_sum(component(fx.f, i)), 1e-12);
    EXPECT_NEAR(mom.mean[i], space.expect(component(fx.f, i)), 1e-13);
    for (std::size_t j = 0; j < 2; ++j)
      EXPECT_NEAR(mom.covariance(i, j), space.covariance(component(fx.f, i), component(fx.f, j)), 1e-13);
  }
}

TEST(JointTable, CenteredRemovesTheMeanOnly) {
  const auto fx = mixed_instance();
  const auto table = build_joint_table(fx.model, fx.f);
  const auto c = centered(table);
  const auto before = moments(table), after = moments(c);
  for (double m : after.mean) EXPECT_NEAR(m, 0.0, 1e-14);
  EXPECT_LE(max_abs(before.covariance - after.covariance), 1e-14);
  for (std::size_t k = 0; k < 3; ++k)
    EXPECT_LE(max_abs_difference(diff_D(table.component(0), k), diff_D(c.component(0), k)), 1e-14);
}

TEST(JointTable, ClosedDiffIsIgnoredByGenericOperators) {
  const auto fx = mixed_instance();
  auto lying = fx.f;
  lying.closed_diff = [](std::size_t, std::span<const double>) { return std::vector<double>{99.0, 99.0}; };
  const auto a = build_joint_table(fx.model, fx.f);
  const auto b = build_joint_table(fx.model, lying);
  EXPECT_LE(max_abs_difference(diff_D(a.component(0), 1), diff_D(b.component(0), 1)), 0.0);
}

TEST(JointTable, ErrorsAreReported) {
  const auto big = ProductModel::iid(rademacher(), 23);
  EXPECT_THROW(build_joint_table(big, centered_sum(big, std::vector<double>(23, 1.0))), CapExceededError);
  const auto small = ProductModel::iid(rademacher(), 2);
  StatisticVector nan;
  nan.dim = 1;
  nan.eval = [](std::span<const double> x) {
    return std::vector<double>{x[0] > 0 ? std::numeric_limits<double>::quiet_NaN() : 0.0};
  };
  EXPECT_THROW(build_joint_table(small, nan), NonFiniteValueError);
  const ProductModel sampler({standard_normal()});
  EXPECT_THROW(build_joint_table(sampler, centered_sum(sampler, {1.0})), std::invalid_argument);
}

TEST(JointTable, DegenerateCoordinateHasZeroDifference) {
  const ProductModel m({ComponentDistribution::from_atoms({{3.0, 1.0}}), rademacher()});
  const auto t = build_joint_table(m, multilinear_statistic({{1.0, {0, 1}}}, 2));
  const auto big = diff_D(t.component(0), 0);
  const auto small = diff_d(t.component(0), 0);
  for (double v : big.values()) EXPECT_EQ(v, 0.0);
  for (double v : small.values()) EXPECT_EQ(v, 0.0);
}
