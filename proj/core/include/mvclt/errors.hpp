#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mvclt {

// Finite product space too large to enumerate.
class CapExceededError : public std::runtime_error {
 public:
  CapExceededError(std::uint64_t count, std::uint64_t cap)
      : std::runtime_error("product space has " + std::to_string(count) +
                           " assignments, exceeding the enumeration cap of " + std::to_string(cap)),
        count_(count),
        cap_(cap) {}
  std::uint64_t count() const { return count_; }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t count_;
  std::uint64_t cap_;
};

// A statistic produced NaN or an infinity.
class NonFiniteValueError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A theorem's hypothesis does not hold for the supplied inputs (for example
// a singular target covariance handed to the Stein bound). `code` is a short
// machine-readable tag such as "C-not-PD".
class HypothesisError : public std::runtime_error {
 public:
  HypothesisError(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace mvclt
