#include "poolplan/optimizer.hpp"

#include <cmath>
#include <cstdio>

namespace poolplan {

OptResult scan_designs(double p, int k_max, const std::optional<Constraints>& constraints,
                       const KEval& rates_at) {
  OptResult best;
  bool have_best = false;
  int feasible = 0;
  for (int k = 1; k <= k_max; ++k) {
    std::optional<SeSp> rates = rates_at(k);
    SeSp r{1.0, 1.0};
    if (k == 1) {
      // Individual testing is the reference design; it stays admissible even
      // when a curve reports degraded accuracy for it.
      if (rates) r = *rates;
    } else {
      if (!rates) continue;
      r = *rates;
      if (constraints && !(r.se >= constraints->delta_se && r.sp >= constraints->delta_sp))
        continue;
    }
    ++feasible;
    const double et = detail::expected_tests_raw(p, k, r.se, r.sp);
    if (!have_best || et < best.expected_tests) {
      best.k_opt = k;
      best.expected_tests = et;
      best.se_at_k = r.se;
      best.sp_at_k = r.sp;
      have_best = true;
    }
  }
  best.feasible_set_size = feasible;
  best.mode = constraints ? OptMode::constrained : OptMode::unconstrained;
  return best;
}

namespace {

KEval model_rates(const MisclassModel& model, Prevalence p) {
  return [&model, p](int k) -> std::optional<SeSp> {
    return evaluate(model, p, GroupSize(k));
  };
}

}  // namespace

OptResult optimize_unconstrained(Prevalence p, const MisclassModel& model, GroupSize k_max) {
  return scan_designs(p.value(), k_max.value(), std::nullopt, model_rates(model, p));
}

OptResult optimize_constrained(Prevalence p, const MisclassModel& model, GroupSize k_max,
                               const Constraints& constraints) {
  check_probability(constraints.delta_se, "delta_se");
  check_probability(constraints.delta_sp, "delta_sp");
  return scan_designs(p.value(), k_max.value(), constraints, model_rates(model, p));
}

MisspecRow misspec_analysis(Prevalence p, double d_true, double d_assumed, GroupSize k_max,
                            const std::optional<Constraints>& constraints) {
  const MisclassModel assumed{FamilySpec::hwang(d_assumed), FamilySpec::perfect()};
  const MisclassModel truth{FamilySpec::hwang(d_true), FamilySpec::perfect()};

  const OptResult hat = constraints ? optimize_constrained(p, assumed, k_max, *constraints)
                                    : optimize_unconstrained(p, assumed, k_max);
  const OptResult opt = constraints ? optimize_constrained(p, truth, k_max, *constraints)
                                    : optimize_unconstrained(p, truth, k_max);

  MisspecRow row;
  row.p = p.value();
  row.d_assumed = d_assumed;
  row.d_true = d_true;
  row.k_hat_opt = hat.k_opt;
  row.k_opt = opt.k_opt;
  row.se_assumed_at_khat = hat.se_at_k;
  row.se_true_at_khat = evaluate(truth, p, GroupSize(hat.k_opt)).se;
  row.se_true_at_kopt = opt.se_at_k;
  row.et_assumed_at_khat = hat.expected_tests;
  row.et_true_at_khat =
      detail::expected_tests_raw(p.value(), hat.k_opt, row.se_true_at_khat, 1.0);
  row.et_true_at_kopt = opt.expected_tests;
  row.mode = constraints ? OptMode::constrained : OptMode::unconstrained;
  return row;
}

std::vector<MisspecRow> misspec_grid(const std::vector<double>& p_values,
                                     const std::vector<double>& d_assumed_values, double d_true,
                                     GroupSize k_max, double delta) {
  std::vector<MisspecRow> rows;
  rows.reserve(p_values.size() * d_assumed_values.size() * 2);
  for (double p : p_values) {
    for (double d : d_assumed_values) {
      rows.push_back(misspec_analysis(Prevalence(p), d_true, d, k_max, std::nullopt));
      rows.push_back(
          misspec_analysis(Prevalence(p), d_true, d, k_max, Constraints{delta, 0.0}));
    }
  }
  return rows;
}

double round_half_up(double x, int decimals) {
  double scale = 1.0;
  for (int i = 0; i < decimals; ++i) scale *= 10.0;
  return std::floor(x * scale + 0.5) / scale;
}

const char* to_string(OptMode mode) {
  return mode == OptMode::unconstrained ? "unconstrained" : "constrained";
}

void write_misspec_csv(std::ostream& out, const std::vector<MisspecRow>& rows) {
  out << "p,d,khat_opt,k_opt,se_hat_khat,se_khat,se_kopt,et_hat_khat,et_khat,et_kopt,mode\n";
  char buffer[256];
  for (const MisspecRow& row : rows) {
    std::snprintf(buffer, sizeof(buffer), "%g,%g,%d,%d,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f,%s\n",
                  row.p, row.d_assumed, row.k_hat_opt, row.k_opt,
                  round_half_up(row.se_assumed_at_khat, 3), round_half_up(row.se_true_at_khat, 3),
                  round_half_up(row.se_true_at_kopt, 3), round_half_up(row.et_assumed_at_khat, 3),
                  round_half_up(row.et_true_at_khat, 3), round_half_up(row.et_true_at_kopt, 3),
                  to_string(row.mode));
    out << buffer;
  }
}

}  // namespace poolplan
