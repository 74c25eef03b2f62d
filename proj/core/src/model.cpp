#include "mvclt/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mvclt {

ProductModel::ProductModel(std::vector<ComponentDistribution> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("ProductModel: needs at least one coordinate");
}

ProductModel ProductModel::iid(const ComponentDistribution& law, std::size_t n) {
  return ProductModel(std::vector<ComponentDistribution>(n, law));
}

bool ProductModel::all_finite() const {
  for (const auto& c : components_)
    if (!c.is_finite()) return false;
  return true;
}

bool ProductModel::is_rademacher() const {
  for (const auto& c : components_) {
    if (!c.is_finite() || c.atoms().size() != 2) return false;
    bool plus = false;
    bool minus = false;
    for (const Atom& a : c.atoms()) {
      if (std::abs(a.prob - 0.5) > 1e-15) return false;
      if (a.value == 1.0) plus = true;
      if (a.value == -1.0) minus = true;
    }
    if (!plus || !minus) return false;
  }
  return true;
}

std::optional<std::uint64_t> ProductModel::assignment_count() const {
  std::uint64_t count = 1;
  for (const auto& c : components_) {
    if (!c.is_finite()) return std::nullopt;
    const std::uint64_t r = c.atoms().size();
    if (count > std::numeric_limits<std::uint64_t>::max() / r) return std::nullopt;
    count *= r;
  }
  return count;
}

void StatisticVector::validate() const {
  if (dim == 0) throw std::invalid_argument("statistic '" + name + "': dimension must be >= 1");
  if (!eval) throw std::invalid_argument("statistic '" + name + "': missing evaluator");
}

StatisticVector centered_sum(const ProductModel& model, std::vector<double> coef, std::string name) {
  if (coef.size() != model.size()) throw std::invalid_argument("centered_sum: coefficient count != n");
  std::vector<double> mu(model.size());
  for (std::size_t k = 0; k < model.size(); ++k) mu[k] = model[k].mean();

  StatisticVector s;
  s.dim = 1;
  s.name = std::move(name);
  s.eval = [coef, mu](std::span<const double> x) {
    double v = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) v += coef[k] * (x[k] - mu[k]);
    return std::vector<double>{v};
  };
  s.closed_diff = [coef, mu](std::size_t k, std::span<const double> x) {
    return std::vector<double>{coef[k] * (x[k] - mu[k])};
  };
  s.closed_cond_diff = [coef, mu](std::size_t k, std::span<const double> x, Filtration) {
    return std::vector<double>{coef[k] * (x[k] - mu[k])};
  };
  return s;
}

StatisticVector centered_product(const ProductModel& model, std::vector<std::size_t> coords,
                                 std::string name) {
  std::vector<double> mu(model.size());
  for (std::size_t k = 0; k < model.size(); ++k) mu[k] = model[k].mean();
  for (std::size_t c : coords)
    if (c >= model.size()) throw std::invalid_argument("centered_product: coordinate out of range");

  StatisticVector s;
  s.dim = 1;
  s.name = std::move(name);
  s.eval = [coords, mu](std::span<const double> x) {
    double v = 1.0;
    for (std::size_t c : coords) v *= x[c] - mu[c];
    return std::vector<double>{v};
  };
  return s;
}

StatisticVector stack(std::vector<StatisticVector> parts, std::string name) {
  if (parts.empty()) throw std::invalid_argument("stack: no parts");
  StatisticVector s;
  s.name = std::move(name);
  bool all_closed = true;
  bool all_cond = true;
  for (const auto& p : parts) {
    p.validate();
    s.dim += p.dim;
    all_closed = all_closed && static_cast<bool>(p.closed_diff);
    all_cond = all_cond && static_cast<bool>(p.closed_cond_diff);
  }
  const std::size_t d = s.dim;
  s.eval = [parts, d](std::span<const double> x) {
    std::vector<double> out;
    out.reserve(d);
    for (const auto& p : parts) {
      const auto v = p.eval(x);
      out.insert(out.end(), v.begin(), v.end());
    }
    return out;
  };
  if (all_closed) {
    s.closed_diff = [parts, d](std::size_t k, std::span<const double> x) {
      std::vector<double> out;
      out.reserve(d);
      for (const auto& p : parts) {
        const auto v = p.closed_diff(k, x);
        out.insert(out.end(), v.begin(), v.end());
      }
      return out;
    };
  }
  if (all_cond) {
    s.closed_cond_diff = [parts, d](std::size_t k, std::span<const double> x, Filtration f) {
      std::vector<double> out;
      out.reserve(d);
      for (const auto& p : parts) {
        const auto v = p.closed_cond_diff(k, x, f);
        out.insert(out.end(), v.begin(), v.end());
      }
      return out;
    };
  }
  return s;
}

}  // namespace mvclt
