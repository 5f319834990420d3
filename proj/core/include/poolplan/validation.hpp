#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "poolplan/optimizer.hpp"
#include "poolplan/rng.hpp"

namespace poolplan {

/// Configuration for sizing a validation study by simulation. The study
/// tests n known-status samples in pools of every size 1..k_max to estimate
/// Se(k) and Sp(k); we search for the smallest n such that a design chosen
/// from those estimates truly meets the sensitivity bound delta with
/// probability at least epsilon.
struct ValidationConfig {
  Prevalence p;
  MisclassModel true_model;
  int k_max = 10;
  double delta = 0.95;          // bound the chosen design must truly meet
  double epsilon = 0.95;        // required probability of meeting it
  double phi_tolerance = 0.01;  // termination band around epsilon
  int replicates = 50000;
  std::uint64_t seed = 0;
  int n_initial = 10000;
  int max_steps = 60;
  int threads = 0;  // 0 = all hardware threads

  /// Optional observer called after each search step with (step, n, phi_hat).
  std::function<void(int, int, double)> on_step;
};

/// A random partition of n units into ceil(n/k) pools of exactly k members.
/// When k does not divide n, the last pool holds the leftover units plus
/// distinct duplicates drawn from units already placed in other pools.
struct Grouping {
  std::vector<std::vector<std::int32_t>> groups;   // 0-based unit indices
  std::vector<std::int32_t> duplicate_indices;     // units reused in the last pool
};

Grouping form_groups(int n, int k, rng::Stream& stream);

/// Per-size estimates from one simulated validation study. Entry k is
/// defined only if at least one pool of size k fell in the corresponding
/// category (>=1 positive member for se_hat, none for sp_hat); index 0 is
/// unused.
struct SeEstimates {
  std::vector<std::optional<double>> se_hat;
  std::vector<std::optional<double>> sp_hat;
  std::vector<std::pair<int, int>> group_counts;  // (positive pools, all-negative pools)
};

/// Simulates one validation study of n samples: draws true statuses once,
/// then regroups the same units for every pool size and tests each pool with
/// the true model's error rates. The size-1 stage is the reference, so its
/// estimates are exact by construction.
SeEstimates simulate_replicate(const ValidationConfig& cfg, int n, rng::Stream& stream);

struct PhiEstimate {
  double phi_hat;              // share of replicates whose chosen design truly meets delta
  double mean_expected_tests;  // replicate average of E(T) at the chosen size, true curve
};

/// Runs cfg.replicates independent studies of size n. Each replicate picks
/// the constrained-optimal pool size from its own estimates; phi_hat is the
/// fraction for which the true sensitivity at that size meets the bound
/// (individual testing always counts as meeting it). Deterministic for fixed
/// (cfg, seed) under any thread count.
PhiEstimate estimate_phi(const ValidationConfig& cfg, int n);

struct ValidationOutcome {
  int n_required = 0;
  std::int64_t t_v = 0;                  // total tests consumed by the study
  std::optional<std::int64_t> n_star;    // break-even population, if one exists
  double phi_hat = 0.0;
  double mean_expected_tests = 1.0;
  std::vector<std::pair<int, double>> bisection_trace;  // (n, phi_hat) per step
};

class NoConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Doubling/bisection search for the smallest n with |phi_hat - epsilon| <=
/// phi_tolerance, starting from n_initial. Throws NoConvergenceError when the
/// band is never entered within max_steps, when the search drives n below
/// k_max (e.g. a perfect assay, where phi is flat at 1), or when n diverges.
ValidationOutcome find_min_validation_n(const ValidationConfig& cfg);

/// Total tests consumed by a validation study of n samples with pools of
/// every size 1..k_max: sum over k of ceil(n/k).
std::int64_t total_validation_tests(int n, int k_max);

/// Smallest screening population for which pooling plus the validation cost
/// beats individual testing: ceil((t_v - n*E) / (1 - E)). Requires
/// 0 < expected_tests < 1; at one or more tests per person pooling never
/// breaks even and a domain_error is thrown.
std::int64_t min_population_for_benefit(std::int64_t n, std::int64_t t_v,
                                        double expected_tests);

}  // namespace poolplan
