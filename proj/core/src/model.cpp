#include "poolplan/model.hpp"

namespace poolplan {

double pool_positive_prob(Prevalence p, GroupSize k, double se_k, double sp_k) {
  check_probability(se_k, "sensitivity");
  check_probability(sp_k, "specificity");
  return detail::pool_positive_prob_raw(p.value(), k.value(), se_k, sp_k);
}

double expected_tests(Prevalence p, GroupSize k, double se_k, double sp_k) {
  check_probability(se_k, "sensitivity");
  check_probability(sp_k, "specificity");
  return detail::expected_tests_raw(p.value(), k.value(), se_k, sp_k);
}

double overall_sensitivity(const DorfmanDesign& design) {
  const SeSp at_k = evaluate(design.model, design.p, design.k);
  if (design.k.value() == 1) return at_k.se;
  const SeSp at_1 = evaluate(design.model, design.p, GroupSize(1));
  // A positive individual must be caught by the pooled test and again by the
  // follow-up individual test.
  return at_k.se * at_1.se;
}

DesignMetrics design_metrics(const DorfmanDesign& design) {
  const int k = design.k.value();
  const SeSp at_k = evaluate(design.model, design.p, design.k);
  const SeSp at_1 = k == 1 ? at_k : evaluate(design.model, design.p, GroupSize(1));

  DesignMetrics metrics;
  metrics.pool_positive_prob =
      detail::pool_positive_prob_raw(design.p.value(), k, at_k.se, at_k.sp);
  metrics.expected_tests_per_person =
      detail::expected_tests_raw(design.p.value(), k, at_k.se, at_k.sp);
  metrics.overall_sensitivity = k == 1 ? at_1.se : at_k.se * at_1.se;
  // A member of an all-negative pool is misclassified only if both stages
  // produce a false positive.
  metrics.overall_specificity_lower_bound =
      k == 1 ? at_1.sp : 1.0 - (1.0 - at_k.sp) * (1.0 - at_1.sp);
  return metrics;
}

}  // namespace poolplan
