#include "poolplan/sensitivity.hpp"

#include <cmath>
#include <stdexcept>

namespace poolplan {

FamilySpec FamilySpec::perfect() { return FamilySpec{}; }

FamilySpec FamilySpec::hwang(double dilution) {
  if (!(dilution >= 0.0 && dilution <= 1.0))
    throw std::invalid_argument("hwang dilution index must lie in [0, 1]");
  FamilySpec f;
  f.kind = Family::hwang;
  f.dilution = dilution;
  return f;
}

FamilySpec FamilySpec::linear(double slope) {
  if (!(slope >= 0.0))
    throw std::invalid_argument("linear slope must be nonnegative");
  FamilySpec f;
  f.kind = Family::linear;
  f.slope = slope;
  return f;
}

FamilySpec FamilySpec::exp_step() {
  FamilySpec f;
  f.kind = Family::exp_step;
  return f;
}

FamilySpec FamilySpec::tabulated(std::vector<double> values) {
  if (values.empty())
    throw std::invalid_argument("tabulated curve needs at least one value");
  for (double v : values) check_probability(v, "tabulated curve value");
  FamilySpec f;
  f.kind = Family::tabulated;
  f.values = std::move(values);
  return f;
}

double hwang_sensitivity(Prevalence p, GroupSize k, double dilution) {
  if (!(dilution >= 0.0 && dilution <= 1.0))
    throw std::invalid_argument("hwang dilution index must lie in [0, 1]");
  // k = 1 cancels to p/p and d = 0 reduces the exponent to 1; return the
  // exact limit in both cases rather than round-tripping through exp/log.
  if (k.value() == 1 || dilution == 0.0) return 1.0;
  const double exponent = std::pow(static_cast<double>(k.value()), dilution);
  const double denom = -std::expm1(exponent * std::log1p(-p.value()));
  return p.value() / denom;
}

double eval_family(const FamilySpec& family, double p, int k) {
  switch (family.kind) {
    case Family::perfect:
      return 1.0;
    case Family::hwang:
      return hwang_sensitivity(Prevalence(p), GroupSize(k), family.dilution);
    case Family::linear: {
      const double value = 1.0 - family.slope * static_cast<double>(k - 1);
      return value > 0.0 ? value : 0.0;
    }
    case Family::exp_step:
      if (k > 11) return 0.0;
      return 1.0 - 0.02 * std::exp2(static_cast<double>(k) * 0.5);
    case Family::tabulated:
      if (k < 1 || static_cast<std::size_t>(k) > family.values.size())
        throw std::out_of_range("tabulated curve has no value for group size " + std::to_string(k));
      return family.values[static_cast<std::size_t>(k) - 1];
  }
  throw std::logic_error("unreachable curve family");
}

SeSp evaluate(const MisclassModel& model, Prevalence p, GroupSize k) {
  return SeSp{eval_family(model.se, p.value(), k.value()),
              eval_family(model.sp, p.value(), k.value())};
}

}  // namespace poolplan
