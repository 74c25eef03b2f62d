#pragma once

#include <cstdint>
#include <vector>

#include "mvclt/matrix.hpp"
#include "mvclt/model.hpp"

namespace mvclt {

struct McConfig {
  std::uint64_t outer_samples = 10000;
  std::uint64_t inner_resamples = 32;
  std::uint64_t seed = 0;
  // Outer samples per chunk. Chunks are the unit of both parallel work and
  // batch-means standard errors.
  std::uint64_t chunk_size = 500;
  // 0 picks std::thread::hardware_concurrency(). Results do not depend on it.
  unsigned threads = 0;

  void validate() const;
};

/// Monte Carlo counterparts of the exact-mode quantities, each with a
/// batch-means standard error.
///
/// Var(Z) uses two conditionally independent inner replicates Z', Z'' per
/// outer draw: E[Z' Z''] = E[Z^2], so the nested estimator carries no
/// O(1/inner_resamples) bias. `bias_caveat` is set when some D_k F had to be
/// estimated by resampling a non-atomic coordinate, which biases E|D_k F|^3.
struct McEstimates {
  std::size_t dim = 0;
  double alpha = 0.5;
  std::uint64_t samples = 0;
  std::uint64_t batches = 0;
  std::vector<double> mean, mean_se;
  Matrix sigma, sigma_se;
  Matrix z_mean, z_mean_se;
  Matrix z_var, z_var_se;
  std::vector<double> third_moment, third_moment_se;
  bool bias_caveat = false;
};

McEstimates mc_estimates(const ProductModel& model, const StatisticVector& f, double alpha,
                         const McConfig& cfg);

}  // namespace mvclt
