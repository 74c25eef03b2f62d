#include <gtest/gtest.h>

#include <cmath>

#include "mvclt/corpus.hpp"
#include "mvclt/joint_table.hpp"
#include "mvclt/monte_carlo.hpp"

using namespace mvclt;

namespace {

void expect_identical(const Matrix& a, const Matrix& b) {
  ASSERT_EQ(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.data().size(); ++i) EXPECT_EQ(a.data()[i], b.data()[i]);
}

}  // namespace

TEST(MonteCarlo, ConfigValidation) {
  McConfig c;
  c.outer_samples = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = McConfig{};
  c.chunk_size = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(MonteCarlo, ProductOfTwoRademachers) {
  const auto m = ProductModel::iid(rademacher(), 2);
  McConfig cfg;
  cfg.outer_samples = 2000;
  const auto e = mc_estimates(m, centered_product(m, {0, 1}), 0.5, cfg);
  // Z = X1^2 X2^2 / 2 + X1^2 X2^2 / 2 = 1 identically.
  EXPECT_DOUBLE_EQ(e.z_mean(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(e.z_var(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(e.third_moment[0], 2.0);
  EXPECT_NEAR(e.sigma(0, 0), 1.0, 4.0 * e.sigma_se(0, 0) + 1e-12);
}

TEST(MonteCarlo, DeterministicAcrossRunsAndThreads) {
  const auto corpus = mc_corpus(3, 9);
  for (const auto& inst : corpus) {
    McConfig cfg;
    cfg.outer_samples = 1500;
    cfg.chunk_size = 100;
    cfg.seed = 42;
    cfg.threads = 1;
    const auto a = mc_estimates(inst.model, inst.statistic, 0.5, cfg);
    cfg.threads = 3;
    const auto b = mc_estimates(inst.model, inst.statistic, 0.5, cfg);
    expect_identical(a.sigma, b.sigma);
    expect_identical(a.z_mean, b.z_mean);
    expect_identical(a.z_var, b.z_var);
    for (std::size_t i = 0; i < a.third_moment.size(); ++i) EXPECT_EQ(a.third_moment[i], b.third_moment[i]);
    cfg.seed = 43;
    const auto c = mc_estimates(inst.model, inst.statistic, 0.5, cfg);
    if (inst.id != "x1x2") EXPECT_NE(a.sigma.data()[0], c.sigma.data()[0]);
  }
}

TEST(MonteCarlo, AgreesWithExactWithinFourStandardErrors) {
  for (const auto& inst : mc_corpus(5, 21)) {
    const auto table = build_joint_table(inst.model, inst.statistic);
    const auto z = z_alpha_moments(table, 0.5);
    const auto sigma = moments(table).covariance;
    const auto third = third_abs_moment_sum(table);
    McConfig cfg;
    cfg.outer_samples = 20000;
    cfg.seed = 5;
    const auto e = mc_estimates(inst.model, inst.statistic, 0.5, cfg);
    for (std::size_t i = 0; i < e.dim; ++i) {
      EXPECT_LE(std::abs(e.third_moment[i] - third[i]), 4.0 * e.third_moment_se[i] + 1e-12) << inst.id;
      for (std::size_t j = 0; j < e.dim; ++j) {
        EXPECT_LE(std::abs(e.sigma(i, j) - sigma(i, j)), 4.0 * e.sigma_se(i, j) + 1e-12) << inst.id;
        EXPECT_LE(std::abs(e.z_mean(i, j) - z.mean(i, j)), 4.0 * e.z_mean_se(i, j) + 1e-12) << inst.id;
        EXPECT_LE(std::abs(e.z_var(i, j) - z.variance(i, j)), 4.0 * e.z_var_se(i, j) + 1e-12) << inst.id;
      }
    }
  }
}

TEST(MonteCarlo, SamplerCoordinatesSetBiasCaveat) {
  const ProductModel m({standard_normal(), standard_normal()});
  McConfig cfg;
  cfg.outer_samples = 500;
  const auto e = mc_estimates(m, multilinear_statistic({{1.0, {0, 1}}}, 2), 0.5, cfg);
  EXPECT_TRUE(e.bias_caveat);
  EXPECT_NEAR(e.sigma(0, 0), 1.0, 0.25);
}
