#include <gtest/gtest.h>

#include <cmath>

#include "mvclt/linalg.hpp"
#include "mvclt/matrix.hpp"
#include "mvclt/rng.hpp"

using namespace mvclt;

namespace {

Matrix random_symmetric(std::size_t d, RandomStream& rng) {
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) m(i, j) = m(j, i) = 2.0 * rng.uniform() - 1.0;
  return m;
}

Matrix reconstruct(const SymmetricEigen& e) {
  const std::size_t d = e.values.size();
  Matrix out(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < d; ++k) out(i, j) += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
  return out;
}

}  // namespace

TEST(Matrix, ArithmeticAndTraces) {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{0, 1}, {1, 0}};
  EXPECT_EQ(a * b, (Matrix{{2, 1}, {4, 3}}));
  EXPECT_EQ(a + b, (Matrix{{1, 3}, {4, 4}}));
  EXPECT_EQ(transpose(a), (Matrix{{1, 3}, {2, 4}}));
  EXPECT_DOUBLE_EQ(trace(a), 5.0);
  EXPECT_DOUBLE_EQ(trace_of_product(a, b), trace(a * b));
  EXPECT_DOUBLE_EQ(frobenius_norm(a), std::sqrt(30.0));
  EXPECT_DOUBLE_EQ(max_asymmetry(a), 1.0);
}

TEST(Jacobi, TwoByTwoClosedForm) {
  const Matrix c{{2, 1}, {1, 2}};
  const auto e = jacobi_eigen(c);
  ASSERT_EQ(e.values.size(), 2u);
  EXPECT_NEAR(e.values[0], 1.0, 1e-14);
  EXPECT_NEAR(e.values[1], 3.0, 1e-14);
}

TEST(Jacobi, ReconstructsRandomSymmetricUpTo16) {
  RandomStream rng(3, 0);
  for (std::size_t d = 1; d <= 16; ++d) {
    const Matrix c = random_symmetric(d, rng);
    const auto e = jacobi_eigen(c);
    EXPECT_LE(max_abs(reconstruct(e) - c), 1e-10 * frobenius_norm(c)) << "d=" << d;
    for (std::size_t k = 1; k < d; ++k) EXPECT_LE(e.values[k - 1], e.values[k]);
  }
}

TEST(Jacobi, RejectsAsymmetricInput) {
  EXPECT_THROW(jacobi_eigen(Matrix{{1, 2}, {0, 1}}), std::invalid_argument);
  EXPECT_THROW(jacobi_eigen(Matrix(2, 3)), std::invalid_argument);
}

TEST(OperatorNorms, DiagonalAndSingular) {
  const auto n = sym_operator_norms(Matrix{{4, 0}, {0, 0.5}});
  EXPECT_NEAR(n.op_norm, 4.0, 1e-14);
  ASSERT_TRUE(n.inv_op_norm);
  EXPECT_NEAR(*n.inv_op_norm, 2.0, 1e-14);
  EXPECT_FALSE(sym_operator_norms(Matrix{{1, 1}, {1, 1}}).inv_op_norm);
}

TEST(GaussianTarget, SingularTargetKeepsActiveDirections) {
  const GaussianTarget t(Matrix{{1, 1}, {1, 1}});
  EXPECT_FALSE(t.positive_definite());
  EXPECT_FALSE(t.cholesky());
  ASSERT_EQ(t.spectral_factor().cols(), 1u);
  const Matrix& f = t.spectral_factor();
  EXPECT_LE(max_abs(f * transpose(f) - t.covariance()), 1e-12);
}

TEST(GaussianTarget, CholeskyFactorReproducesCovariance) {
  const Matrix c{{2, 0.5, 0}, {0.5, 1, 0.2}, {0, 0.2, 3}};
  const GaussianTarget t(c);
  ASSERT_TRUE(t.cholesky());
  EXPECT_LE(max_abs(*t.cholesky() * transpose(*t.cholesky()) - c), 1e-14);
  EXPECT_TRUE(t.positive_definite());
}
