#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvclt/distribution.hpp"

namespace mvclt {

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 22;

/// The independent input vector X = (X_1, ..., X_n).
class ProductModel {
 public:
  explicit ProductModel(std::vector<ComponentDistribution> components);
  static ProductModel iid(const ComponentDistribution& law, std::size_t n);

  std::size_t size() const { return components_.size(); }
  const ComponentDistribution& operator[](std::size_t k) const { return components_.at(k); }
  const std::vector<ComponentDistribution>& components() const { return components_; }

  bool all_finite() const;
  bool is_rademacher() const;
  // Product of atom counts; nullopt when a component is a sampler or the
  // product overflows 64 bits.
  std::optional<std::uint64_t> assignment_count() const;

 private:
  std::vector<ComponentDistribution> components_;
};

/// Which sigma-field a conditional expectation is taken against: `past`
/// fixes a prefix of the coordinates, `future` fixes a suffix.
enum class Filtration { past, future };

/// F = (F_1, ..., F_d) as a function of an assignment x in R^n.
///
/// `closed_diff(k, x)`, when present, returns the difference operator
/// D_k F(x) = F(x) - E_k F(x) in closed form. `closed_cond_diff(k, x, f)`
/// returns E[D_k F | past or future sigma-field through coordinate k](x)
/// in closed form. Both are optional shortcuts; the generic operators never
/// need them.
struct StatisticVector {
  using Eval = std::function<std::vector<double>(std::span<const double>)>;
  using ClosedDiff = std::function<std::vector<double>(std::size_t, std::span<const double>)>;
  using ClosedCondDiff =
      std::function<std::vector<double>(std::size_t, std::span<const double>, Filtration)>;

  std::size_t dim = 0;
  Eval eval;
  ClosedDiff closed_diff;
  ClosedCondDiff closed_cond_diff;
  std::string name;

  // Throws std::invalid_argument unless dim >= 1 and eval is set.
  void validate() const;
};

// Linear combination sum_k coef[k] * (X_k - mean_k); d = 1.
StatisticVector centered_sum(const ProductModel& model, std::vector<double> coef,
                             std::string name = "sum");
// prod over `coords` of (X_k - mean_k); d = 1.
StatisticVector centered_product(const ProductModel& model, std::vector<std::size_t> coords,
                                 std::string name = "product");
// Stacks scalar statistics into one vector statistic.
StatisticVector stack(std::vector<StatisticVector> parts, std::string name = "stack");

}  // namespace mvclt
