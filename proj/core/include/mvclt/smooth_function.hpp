#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvclt/matrix.hpp"

namespace mvclt {

/// Certified smoothness constants of a test function g. Any subset may be
/// absent; bound calculators throw when one they need is missing.
struct SmoothnessConstants {
  std::optional<double> lip;     // ||g||_Lip
  std::optional<double> m2;      // M_2(g), Lipschitz constant of the gradient
  std::optional<double> g1_inf;  // max first partial derivative
  std::optional<double> g2_inf;  // ||g''||_inf, max second partial
  std::optional<double> g3_inf;  // ||g'''||_inf, max third partial

  static SmoothnessConstants unit();  // every constant equal to 1
  void validate() const;             // present values must be >= 0
};

struct SmoothTestFunction {
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> eval;
  std::function<std::vector<double>(std::span<const double>)> grad;  // optional
  SmoothnessConstants constants;
  std::function<double(const Matrix&)> gaussian_mean;  // optional closed form of E g(Y), Y ~ N(0, C)
  std::string name;
};

}  // namespace mvclt
