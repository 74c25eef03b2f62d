#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mvclt/rng.hpp"

namespace mvclt {

struct Atom {
  double value;
  double prob;
};

/// Moments of a one-dimensional law, indexed by power p = 0..4.
struct MomentSummary {
  double mean = 0.0;
  std::array<double, 5> abs_moment{};          // E|X|^p
  std::array<double, 5> central_abs_moment{};  // E|X - mean|^p
};

using Sampler = std::function<double(RandomStream&)>;

/// Law of one coordinate X_i: either finitely many atoms (usable in exact
/// enumeration) or a sampler (Monte Carlo only).
class ComponentDistribution {
 public:
  // Probabilities must lie in (0, 1] and sum to 1 within 1e-12; values must
  // be finite and distinct.
  static ComponentDistribution from_atoms(std::vector<Atom> atoms, std::string name = "atoms");
  static ComponentDistribution from_sampler(Sampler sampler, std::optional<MomentSummary> moments,
                                            std::string name);

  bool is_finite() const { return !atoms_.empty(); }
  // Throws std::logic_error for sampler laws.
  const std::vector<Atom>& atoms() const;
  double draw(RandomStream& rng) const;

  const std::string& name() const { return name_; }
  bool has_moments() const { return moments_.has_value(); }
  // The accessors below throw std::logic_error when no moments are known.
  const MomentSummary& moments() const;
  double mean() const { return moments().mean; }
  double abs_moment(int p) const;
  double central_abs_moment(int p) const;
  double variance() const { return central_abs_moment(2); }
  // Var(X^2) = E X^4 - (E X^2)^2
  double variance_of_square() const;

 private:
  ComponentDistribution() = default;

  std::string name_;
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
  Sampler sampler_;
  std::optional<MomentSummary> moments_;
};

MomentSummary moments_of_atoms(const std::vector<Atom>& atoms);

ComponentDistribution rademacher();
ComponentDistribution bernoulli(double p);
// Two-point law with mean 0 and variance 1 that puts mass p on the positive atom.
ComponentDistribution standardized_two_point(double p);
ComponentDistribution standard_normal();
// Uniform on [-sqrt(3), sqrt(3)]: mean 0, variance 1.
ComponentDistribution standardized_uniform();

}  // namespace mvclt
