#include "mvclt/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mvclt {

MomentSummary moments_of_atoms(const std::vector<Atom>& atoms) {
  MomentSummary m;
  for (const Atom& a : atoms) m.mean += a.prob * a.value;
  for (int p = 0; p <= 4; ++p) {
    double raw = 0.0;
    double central = 0.0;
    for (const Atom& a : atoms) {
      raw += a.prob * std::pow(std::abs(a.value), p);
      central += a.prob * std::pow(std::abs(a.value - m.mean), p);
    }
    m.abs_moment[p] = raw;
    m.central_abs_moment[p] = central;
  }
  return m;
}

ComponentDistribution ComponentDistribution::from_atoms(std::vector<Atom> atoms, std::string name) {
  if (atoms.empty()) throw std::invalid_argument("distribution '" + name + "': no atoms");
  double total = 0.0;
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.value)) throw std::invalid_argument("distribution '" + name + "': non-finite atom");
    if (!(a.prob > 0.0 && a.prob <= 1.0)) {
      throw std::invalid_argument("distribution '" + name + "': atom probability outside (0, 1]");
    }
    total += a.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("distribution '" + name + "': probabilities sum to " +
                                std::to_string(total));
  }
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (std::size_t j = i + 1; j < atoms.size(); ++j)
      if (atoms[i].value == atoms[j].value) {
        throw std::invalid_argument("distribution '" + name + "': repeated atom value");
      }

  ComponentDistribution d;
  d.name_ = std::move(name);
  d.moments_ = moments_of_atoms(atoms);
  d.cumulative_.reserve(atoms.size());
  double c = 0.0;
  for (const Atom& a : atoms) d.cumulative_.push_back(c += a.prob);
  d.atoms_ = std::move(atoms);
  return d;
}

ComponentDistribution ComponentDistribution::from_sampler(Sampler sampler,
                                                          std::optional<MomentSummary> moments,
                                                          std::string name) {
  if (!sampler) throw std::invalid_argument("distribution '" + name + "': empty sampler");
  ComponentDistribution d;
  d.name_ = std::move(name);
  d.sampler_ = std::move(sampler);
  d.moments_ = moments;
  return d;
}

const std::vector<Atom>& ComponentDistribution::atoms() const {
  if (!is_finite()) throw std::logic_error("distribution '" + name_ + "' has no atoms");
  return atoms_;
}

double ComponentDistribution::draw(RandomStream& rng) const {
  if (!is_finite()) return sampler_(rng);
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto idx = std::min<std::size_t>(it - cumulative_.begin(), atoms_.size() - 1);
  return atoms_[idx].value;
}

const MomentSummary& ComponentDistribution::moments() const {
  if (!moments_) throw std::logic_error("distribution '" + name_ + "': moments unavailable");
  return *moments_;
}

double ComponentDistribution::abs_moment(int p) const {
  if (p < 0 || p > 4) throw std::out_of_range("abs_moment: power outside 0..4");
  return moments().abs_moment[p];
}

double ComponentDistribution::central_abs_moment(int p) const {
  if (p < 0 || p > 4) throw std::out_of_range("central_abs_moment: power outside 0..4");
  return moments().central_abs_moment[p];
}

double ComponentDistribution::variance_of_square() const {
  const double m2 = abs_moment(2);
  return abs_moment(4) - m2 * m2;
}

ComponentDistribution rademacher() {
  return ComponentDistribution::from_atoms({{-1.0, 0.5}, {1.0, 0.5}}, "rademacher");
}

ComponentDistribution bernoulli(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("bernoulli: p outside (0, 1)");
  return ComponentDistribution::from_atoms({{0.0, 1.0 - p}, {1.0, p}},
                                           "bernoulli(" + std::to_string(p) + ")");
}

ComponentDistribution standardized_two_point(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("standardized_two_point: p outside (0, 1)");
  const double hi = std::sqrt((1.0 - p) / p);
  const double lo = -std::sqrt(p / (1.0 - p));
  return ComponentDistribution::from_atoms({{lo, 1.0 - p}, {hi, p}},
                                           "two_point(" + std::to_string(p) + ")");
}

ComponentDistribution standard_normal() {
  MomentSummary m;
  const double c1 = std::sqrt(2.0 / std::numbers::pi);
  m.abs_moment = {1.0, c1, 1.0, 2.0 * c1, 3.0};
  m.central_abs_moment = m.abs_moment;
  return ComponentDistribution::from_sampler([](RandomStream& rng) { return rng.normal(); }, m, "normal");
}

ComponentDistribution standardized_uniform() {
  const double h = std::sqrt(3.0);
  MomentSummary m;
  for (int p = 0; p <= 4; ++p) m.abs_moment[p] = std::pow(h, p) / (p + 1);
  m.central_abs_moment = m.abs_moment;
  return ComponentDistribution::from_sampler(
      [h](RandomStream& rng) { return h * (2.0 * rng.uniform() - 1.0); }, m, "uniform");
}

}  // namespace mvclt
