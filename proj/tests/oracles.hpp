#pragma once

// Test-only reference implementations. Deliberately naive: they enumerate or
// scan everything so the library's closed forms and optimizers can be checked
// against an independent route.

#include <stdexcept>

namespace oracle {

struct PoolLaw {
  double pool_positive;
  double tests_per_person;
};

// Walks all 2^k status vectors, weighting each by its Bernoulli(p)
// probability, and both branches of the pooled test.
inline PoolLaw enumerate_pool(double p, int k, double se, double sp) {
  if (k < 1 || k > 24) throw std::invalid_argument("enumeration supports 1 <= k <= 24");
  double positive = 0.0;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    double prob = 1.0;
    for (int i = 0; i < k; ++i) prob *= ((mask >> i) & 1u) ? p : (1.0 - p);
    positive += prob * (mask != 0 ? se : 1.0 - sp);
  }
  PoolLaw law;
  law.pool_positive = positive;
  law.tests_per_person = k == 1 ? 1.0 : positive + 1.0 / static_cast<double>(k);
  return law;
}

// P(a fixed unit is positive | at least one of k units is positive), by the
// same enumeration.
inline double conditional_unit_positive(double p, int k) {
  double numerator = 0.0;
  double denominator = 0.0;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    if (mask == 0) continue;
    double prob = 1.0;
    for (int i = 0; i < k; ++i) prob *= ((mask >> i) & 1u) ? p : (1.0 - p);
    denominator += prob;
    if (mask & 1u) numerator += prob;
  }
  return numerator / denominator;
}

}  // namespace oracle
