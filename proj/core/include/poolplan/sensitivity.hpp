#pragma once

#include <string>
#include <vector>

#include "poolplan/types.hpp"

namespace poolplan {

enum class Family { perfect, hwang, linear, exp_step, tabulated };

/// One group-size-dependent accuracy curve (either a sensitivity or a
/// specificity as a function of the pool size k).
///
/// Supported families:
///   perfect    always 1
///   hwang      dilution curve p / (1 - (1-p)^(k^d)); depends on prevalence
///   linear     1 - slope*(k - 1), floored at 0
///   exp_step   1 - 0.02*2^(k/2) for k <= 11, 0 beyond
///   tabulated  explicit per-size values, indexed from k = 1
struct FamilySpec {
  Family kind = Family::perfect;
  double dilution = 0.0;        // hwang index d, in [0, 1]
  double slope = 0.02;          // linear decay per extra pooled sample
  std::vector<double> values;   // tabulated entries for k = 1, 2, ...

  static FamilySpec perfect();
  static FamilySpec hwang(double dilution);
  static FamilySpec linear(double slope = 0.02);
  static FamilySpec exp_step();
  static FamilySpec tabulated(std::vector<double> values);
};

/// Pooled-assay misclassification model: the pair of curves Se(k), Sp(k).
/// Specificity defaults to perfect, matching the usual working assumption
/// that pooling degrades sensitivity but not specificity.
struct MisclassModel {
  FamilySpec se;
  FamilySpec sp = FamilySpec::perfect();

  /// True when either curve changes with the population prevalence.
  bool prevalence_linked() const {
    return se.kind == Family::hwang || sp.kind == Family::hwang;
  }
};

/// Hwang dilution sensitivity p / (1 - (1-p)^(k^d)). Equals 1 exactly for
/// k = 1 or d = 0; at d = 1 it is the probability that a fixed unit is
/// positive given the pool contains at least one positive.
double hwang_sensitivity(Prevalence p, GroupSize k, double dilution);

/// Evaluates a single curve at pool size k. Values are returned as defined by
/// the family, with no clamping beyond what the family itself specifies.
/// Tabulated lookups past the covered range are an error.
double eval_family(const FamilySpec& family, double p, int k);

struct SeSp {
  double se;
  double sp;
};

SeSp evaluate(const MisclassModel& model, Prevalence p, GroupSize k);

/// Wire format used by configuration files and the command line, e.g.
/// {"family":"hwang","d":0.1} or {"family":"tabulated","values":[1,0.9]}.
/// Unknown families or fields are rejected.
FamilySpec family_from_json(const std::string& text);
std::string family_to_json(const FamilySpec& family);

}  // namespace poolplan
