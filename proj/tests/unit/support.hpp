#pragma once

#include <vector>

#include "mvclt/distribution.hpp"
#include "mvclt/joint_table.hpp"
#include "mvclt/model.hpp"
#include "oracle/oracle.hpp"

namespace testing_support {

inline oracle::Law to_oracle(const mvclt::ComponentDistribution& d) {
  oracle::Law law;
  for (const auto& a : d.atoms()) {
    law.v.push_back(a.value);
    law.p.push_back(a.prob);
  }
  return law;
}

inline oracle::Space to_oracle(const mvclt::ProductModel& m) {
  std::vector<oracle::Law> laws;
  for (const auto& c : m.components()) laws.push_back(to_oracle(c));
  return oracle::Space(laws);
}

inline std::vector<double> values(const mvclt::RandomVariableTable& t) {
  return std::vector<double>(t.values().begin(), t.values().end());
}

// Scalar F_i taken from a statistic's evaluator; the statistic is input
// data for both sides, not the computation under test.
inline oracle::Scalar component(const mvclt::StatisticVector& f, std::size_t i) {
  return [f, i](const oracle::Point& x) { return f.eval(x)[i]; };
}

}  // namespace testing_support
