#pragma once

#include <stdexcept>
#include <string>

namespace poolplan {

/// Probability that any one individual carries the trait being screened for.
/// Strictly inside (0, 1); the degenerate endpoints are rejected.
class Prevalence {
 public:
  explicit Prevalence(double value) : value_(value) {
    if (!(value > 0.0 && value < 1.0))
      throw std::invalid_argument("prevalence must lie strictly in (0, 1)");
  }
  double value() const { return value_; }

 private:
  double value_;
};

/// Number of samples pooled into one test. At least 1; a size of 1 means
/// plain individual testing.
class GroupSize {
 public:
  explicit GroupSize(int value) : value_(value) {
    if (value < 1) throw std::invalid_argument("group size must be >= 1");
  }
  int value() const { return value_; }

 private:
  int value_;
};

inline void check_probability(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}

}  // namespace poolplan
