#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvclt/model.hpp"
#include "mvclt/rng.hpp"
#include "mvclt/verify.hpp"

namespace mvclt {

/// c * prod_{k in coords} x_k
struct MultilinearTerm {
  double coef = 0.0;
  std::vector<std::size_t> coords;
};

/// Scalar statistic sum of multilinear terms in the raw coordinates.
StatisticVector multilinear_statistic(std::vector<MultilinearTerm> terms, std::size_t n,
                                      std::string name = "multilinear");

/// Random multilinear polynomial of degree <= max_degree in n coordinates,
/// coefficients scaled so that sum |c| = 1.
std::vector<MultilinearTerm> random_multilinear(std::size_t n, std::size_t max_degree, RandomStream& rng);

/// Finite law with 1..max_atoms distinct atoms in [-2, 2].
ComponentDistribution random_finite_law(std::size_t max_atoms, RandomStream& rng);

struct CorpusInstance {
  std::string id;
  ProductModel model;
  StatisticVector statistic;
};

/// Random exact instances: n in 1..max_n, <= max_atoms atoms per
/// coordinate, F = (U, V) a pair of random multilinear polynomials of
/// degree <= 3. A few structured instances (additive, product) lead.
std::vector<CorpusInstance> identity_corpus(std::size_t count, std::uint64_t seed, std::size_t max_n = 6,
                                            std::size_t max_atoms = 3);

/// Rademacher functionals: monomials, sums, products and random multilinear
/// polynomials of degree <= 3, n <= 6.
std::vector<CorpusInstance> rademacher_corpus(std::size_t random_count, std::uint64_t seed);

/// Runs statistics over binary inputs with n + m_d - 1 <= 12.
std::vector<BoundCheckInstance> runs_instances();
/// Quadratic forms over binary standardized inputs with n <= 10.
std::vector<BoundCheckInstance> quadform_instances();

/// The shipped bound-check corpus: hand-checkable anchors, Rademacher
/// polynomials, general finite models, and the specialized instances.
std::vector<BoundCheckInstance> default_bound_instances();

/// Instances with closed-form or enumerable answers for Monte Carlo checks.
std::vector<CorpusInstance> mc_corpus(std::size_t count, std::uint64_t seed);

}  // namespace mvclt
