#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "poolplan/model.hpp"

namespace poolplan {

/// Operating characteristics of one simulated Dorfman screening run.
struct ScreenReport {
  std::int64_t population = 0;
  int k = 1;
  std::int64_t groups = 0;
  std::int64_t positive_pools = 0;
  std::int64_t total_tests = 0;
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
  std::int64_t false_negatives = 0;
  std::int64_t false_positives = 0;
  double tests_per_person = 0.0;
  double empirical_overall_se = 1.0;
  double empirical_overall_sp = 1.0;
};

/// Simulates screening a whole population with pools of size k: one pooled
/// test per group, then an individual test for every member of a positive
/// pool. A trailing short group of size population mod k is tested with the
/// model's rates for its actual size. Deterministic for a fixed seed under
/// any thread count.
ScreenReport simulate_screen(std::int64_t population, Prevalence p, GroupSize k,
                             const MisclassModel& model, std::uint64_t seed, int threads = 0);

/// One report per pool size in [k_from, k_to].
std::vector<ScreenReport> sweep(std::int64_t population, Prevalence p,
                                const MisclassModel& model, int k_from, int k_to,
                                std::uint64_t seed, int threads = 0);

/// CSV with the fixed header k,tests_per_person,overall_se,overall_sp,total_tests.
void write_sweep_csv(std::ostream& out, const std::vector<ScreenReport>& reports);

}  // namespace poolplan
