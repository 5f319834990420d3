#pragma once

#include <cmath>

#include "poolplan/sensitivity.hpp"
#include "poolplan/types.hpp"

namespace poolplan {

/// A Dorfman two-stage design: test pools of k samples, then retest every
/// member of a positive pool individually. k = 1 degenerates to plain
/// individual testing.
struct DorfmanDesign {
  Prevalence p;
  GroupSize k;
  MisclassModel model;
};

struct DesignMetrics {
  double pool_positive_prob;
  double expected_tests_per_person;
  double overall_sensitivity;
  /// Exact only for individuals in all-negative pools; pools that mix
  /// positive and negative members have no closed form and the true overall
  /// specificity can only be measured empirically (see simulate_screen).
  double overall_specificity_lower_bound;
};

/// Probability that the pooled test of a size-k group reads positive:
/// Se(k) - (Se(k) + Sp(k) - 1)(1 - p)^k.
double pool_positive_prob(Prevalence p, GroupSize k, double se_k, double sp_k);

/// Expected number of tests per person. Exactly 1 when k = 1; otherwise the
/// pooled-positive probability plus 1/k.
double expected_tests(Prevalence p, GroupSize k, double se_k, double sp_k);

/// Probability a positive individual is flagged positive at the end of the
/// two-stage procedure: Se(k) * Se(1), which reduces to Se(k) when the
/// individual test is the error-free reference.
double overall_sensitivity(const DorfmanDesign& design);

DesignMetrics design_metrics(const DorfmanDesign& design);

namespace detail {

// Unchecked fast paths; callers validate arguments once up front.
inline double pool_positive_prob_raw(double p, int k, double se, double sp) {
  // (1-p)^k via expm1/log1p keeps precision for small p and large k.
  const double pooled_prevalence =
      -std::expm1(static_cast<double>(k) * std::log1p(-p));
  // Convex-combination form of Se - (Se + Sp - 1)(1-p)^k; stays in [0, 1].
  return se * pooled_prevalence + (1.0 - sp) * (1.0 - pooled_prevalence);
}

inline double expected_tests_raw(double p, int k, double se, double sp) {
  if (k == 1) return 1.0;
  return pool_positive_prob_raw(p, k, se, sp) + 1.0 / static_cast<double>(k);
}

}  // namespace detail

}  // namespace poolplan
