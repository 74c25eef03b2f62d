#include "mvclt/smooth_function.hpp"

#include <stdexcept>

namespace mvclt {

SmoothnessConstants SmoothnessConstants::unit() { return {1.0, 1.0, 1.0, 1.0, 1.0}; }

void SmoothnessConstants::validate() const {
  for (const auto& c : {lip, m2, g1_inf, g2_inf, g3_inf}) {
    if (c && !(*c >= 0.0)) throw std::invalid_argument("smoothness constants must be >= 0");
  }
}

}  // namespace mvclt
