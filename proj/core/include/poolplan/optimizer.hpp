#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "poolplan/model.hpp"

namespace poolplan {

/// Lower bounds the chosen design must satisfy: Se(k) >= delta_se and
/// Sp(k) >= delta_sp.
struct Constraints {
  double delta_se = 0.0;
  double delta_sp = 0.0;
};

enum class OptMode { unconstrained, constrained };

struct OptResult {
  int k_opt = 1;
  double expected_tests = 1.0;
  double se_at_k = 1.0;
  double sp_at_k = 1.0;
  int feasible_set_size = 0;
  OptMode mode = OptMode::unconstrained;
};

/// Smallest group size minimizing the expected tests per person over
/// k = 1..k_max. Ties go to the smaller size.
OptResult optimize_unconstrained(Prevalence p, const MisclassModel& model, GroupSize k_max);

/// Same objective restricted to sizes meeting the constraints. Individual
/// testing (k = 1) is the error-free reference and always admissible, so a
/// solution always exists.
OptResult optimize_constrained(Prevalence p, const MisclassModel& model, GroupSize k_max,
                               const Constraints& constraints);

/// Per-size rates fed to the scan; nullopt marks a size that cannot be used
/// at all (k = 1 is always usable regardless).
using KEval = std::function<std::optional<SeSp>(int k)>;

/// The exhaustive scan both entry points above reduce to. Also used by the
/// validation simulator, which optimizes over estimated curves with gaps.
OptResult scan_designs(double p, int k_max, const std::optional<Constraints>& constraints,
                       const KEval& rates_at);

/// One row of the assumed-versus-true comparison: the design is chosen under
/// a hwang curve with index d_assumed while the assay truly follows d_true.
struct MisspecRow {
  double p = 0.0;
  double d_assumed = 0.0;
  double d_true = 0.0;
  int k_hat_opt = 1;  // optimum under the assumed curve
  int k_opt = 1;      // optimum under the true curve
  double se_assumed_at_khat = 1.0;
  double se_true_at_khat = 1.0;
  double se_true_at_kopt = 1.0;
  double et_assumed_at_khat = 1.0;
  double et_true_at_khat = 1.0;
  double et_true_at_kopt = 1.0;
  OptMode mode = OptMode::unconstrained;
};

MisspecRow misspec_analysis(Prevalence p, double d_true, double d_assumed, GroupSize k_max,
                            const std::optional<Constraints>& constraints);

/// Full comparison grid, both modes per (p, d_assumed) cell, ordered by
/// (p, d_assumed) with the unconstrained row first.
std::vector<MisspecRow> misspec_grid(const std::vector<double>& p_values,
                                     const std::vector<double>& d_assumed_values, double d_true,
                                     GroupSize k_max, double delta);

/// Rounds half-up at the given number of decimals; presentation only.
double round_half_up(double x, int decimals);

/// CSV with the fixed header
/// p,d,khat_opt,k_opt,se_hat_khat,se_khat,se_kopt,et_hat_khat,et_khat,et_kopt,mode
/// and quantities rounded half-up to 3 decimals.
void write_misspec_csv(std::ostream& out, const std::vector<MisspecRow>& rows);

const char* to_string(OptMode mode);

}  // namespace poolplan
