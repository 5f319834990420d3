#include "poolplan/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parallel.hpp"

namespace poolplan {

namespace {

// Samples `need` distinct positions in [0, bound). need is at most k - 1,
// tiny next to bound, so rejection terminates almost immediately.
std::vector<std::int64_t> sample_distinct(rng::Stream& stream, std::int64_t bound, int need) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(need));
  for (int j = 0; j < need; ++j) {
    std::int64_t candidate;
    bool fresh;
    do {
      candidate = static_cast<std::int64_t>(stream.below(static_cast<std::uint64_t>(bound)));
      fresh = true;
      for (int i = 0; i < j; ++i)
        if (out[static_cast<std::size_t>(i)] == candidate) fresh = false;
    } while (!fresh);
    out[static_cast<std::size_t>(j)] = candidate;
  }
  return out;
}

struct StageTally {
  int positive_groups = 0;
  int positive_groups_testing_positive = 0;
  int negative_groups = 0;
  int negative_groups_testing_negative = 0;
};

// One pass of the study at pool size k: reshuffles the (exchangeable) status
// array, chunks it into pools, and tests each pool with the stage's rates.
StageTally run_stage(std::vector<std::uint8_t>& status, int k, double se_k, double sp_k,
                     rng::Stream& stream) {
  const int n = static_cast<int>(status.size());
  stream.shuffle(status.data(), status.size());
  const int full = n / k;
  const int remainder = n % k;
  StageTally tally;
  const std::uint8_t* data = status.data();

  auto test_pool = [&](bool any_positive) {
    if (any_positive) {
      ++tally.positive_groups;
      tally.positive_groups_testing_positive += stream.bernoulli(se_k);
    } else {
      ++tally.negative_groups;
      tally.negative_groups_testing_negative += !stream.bernoulli(1.0 - sp_k);
    }
  };

  for (int g = 0; g < full; ++g) {
    bool any = false;
    const std::uint8_t* begin = data + static_cast<std::size_t>(g) * k;
    for (int i = 0; i < k; ++i) any |= begin[i] != 0;
    test_pool(any);
  }
  if (remainder > 0) {
    bool any = false;
    for (int i = full * k; i < n; ++i) any |= data[i] != 0;
    // Fill the short pool with distinct duplicates from the earlier pools;
    // a duplicate carries its unit's true status.
    const int need = k - remainder;
    const auto picks = sample_distinct(stream, static_cast<std::int64_t>(full) * k, need);
    for (const std::int64_t pick : picks) any |= data[pick] != 0;
    test_pool(any);
  }
  return tally;
}

struct ReplicateDecision {
  int k_hat;
  bool truly_meets_bound;
  double expected_tests_true;
};

// Everything one replicate contributes: simulate the study, solve the
// constrained problem with the estimated curve, score the choice against the
// true curve.
ReplicateDecision run_replicate(const ValidationConfig& cfg, int n,
                                const std::vector<SeSp>& truth, rng::Stream& stream,
                                std::vector<std::uint8_t>& status, std::vector<double>& se_hat,
                                std::vector<std::uint8_t>& se_defined) {
  const double p = cfg.p.value();
  status.resize(static_cast<std::size_t>(n));
  for (auto& s : status) s = stream.bernoulli(p) ? 1 : 0;

  se_hat.assign(static_cast<std::size_t>(cfg.k_max) + 1, 0.0);
  se_defined.assign(static_cast<std::size_t>(cfg.k_max) + 1, 0);
  for (int k = 2; k <= cfg.k_max; ++k) {
    const StageTally tally = run_stage(status, k, truth[k].se, truth[k].sp, stream);
    if (tally.positive_groups > 0) {
      se_hat[k] = static_cast<double>(tally.positive_groups_testing_positive) /
                  static_cast<double>(tally.positive_groups);
      se_defined[k] = 1;
    }
  }

  const Constraints bound{cfg.delta, 0.0};
  const OptResult chosen =
      scan_designs(p, cfg.k_max, bound, [&](int k) -> std::optional<SeSp> {
        if (k == 1) return SeSp{1.0, 1.0};  // reference stage, taken as exact
        if (!se_defined[k]) return std::nullopt;
        return SeSp{se_hat[k], 1.0};
      });

  ReplicateDecision decision;
  decision.k_hat = chosen.k_opt;
  decision.truly_meets_bound = chosen.k_opt == 1 || truth[chosen.k_opt].se > cfg.delta;
  decision.expected_tests_true = detail::expected_tests_raw(
      p, chosen.k_opt, truth[chosen.k_opt].se, truth[chosen.k_opt].sp);
  return decision;
}

std::vector<SeSp> true_rates(const ValidationConfig& cfg) {
  std::vector<SeSp> truth(static_cast<std::size_t>(cfg.k_max) + 1, SeSp{1.0, 1.0});
  for (int k = 1; k <= cfg.k_max; ++k)
    truth[k] = evaluate(cfg.true_model, cfg.p, GroupSize(k));
  return truth;
}

void check_config(const ValidationConfig& cfg) {
  if (cfg.k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  if (cfg.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (!(cfg.phi_tolerance > 0.0 && cfg.phi_tolerance < cfg.epsilon))
    throw std::invalid_argument("phi_tolerance must lie in (0, epsilon)");
  check_probability(cfg.delta, "delta");
  check_probability(cfg.epsilon, "epsilon");
}

}  // namespace

Grouping form_groups(int n, int k, rng::Stream& stream) {
  if (k < 1) throw std::invalid_argument("group size must be >= 1");
  if (n < k) throw std::invalid_argument("need at least k units to form a group");
  std::vector<std::int32_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  stream.shuffle(order);

  const int full = n / k;
  const int remainder = n % k;
  Grouping grouping;
  grouping.groups.reserve(static_cast<std::size_t>(full) + (remainder ? 1 : 0));
  for (int g = 0; g < full; ++g)
    grouping.groups.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(g) * k,
                                 order.begin() + static_cast<std::ptrdiff_t>(g + 1) * k);
  if (remainder > 0) {
    std::vector<std::int32_t> last(order.begin() + static_cast<std::ptrdiff_t>(full) * k,
                                   order.end());
    const int need = k - remainder;
    const auto picks = sample_distinct(stream, static_cast<std::int64_t>(full) * k, need);
    for (const std::int64_t pick : picks) {
      const std::int32_t unit = order[static_cast<std::size_t>(pick)];
      last.push_back(unit);
      grouping.duplicate_indices.push_back(unit);
    }
    grouping.groups.push_back(std::move(last));
  }
  return grouping;
}

SeEstimates simulate_replicate(const ValidationConfig& cfg, int n, rng::Stream& stream) {
  check_config(cfg);
  if (n < cfg.k_max)
    throw std::invalid_argument("validation sample must be at least the largest pool size");

  const double p = cfg.p.value();
  const std::vector<SeSp> truth = true_rates(cfg);
  std::vector<std::uint8_t> status(static_cast<std::size_t>(n));
  for (auto& s : status) s = stream.bernoulli(p) ? 1 : 0;

  SeEstimates est;
  est.se_hat.assign(static_cast<std::size_t>(cfg.k_max) + 1, std::nullopt);
  est.sp_hat.assign(static_cast<std::size_t>(cfg.k_max) + 1, std::nullopt);
  est.group_counts.assign(static_cast<std::size_t>(cfg.k_max) + 1, {0, 0});

  // The size-1 stage defines the reference statuses, so its estimates are
  // exact whenever the relevant pools exist at all.
  const int positives = static_cast<int>(std::count(status.begin(), status.end(), 1));
  est.group_counts[1] = {positives, n - positives};
  if (positives > 0) est.se_hat[1] = 1.0;
  if (n - positives > 0) est.sp_hat[1] = 1.0;

  for (int k = 2; k <= cfg.k_max; ++k) {
    const StageTally tally = run_stage(status, k, truth[k].se, truth[k].sp, stream);
    est.group_counts[k] = {tally.positive_groups, tally.negative_groups};
    if (tally.positive_groups > 0)
      est.se_hat[k] = static_cast<double>(tally.positive_groups_testing_positive) /
                      static_cast<double>(tally.positive_groups);
    if (tally.negative_groups > 0)
      est.sp_hat[k] = static_cast<double>(tally.negative_groups_testing_negative) /
                      static_cast<double>(tally.negative_groups);
  }
  return est;
}

PhiEstimate estimate_phi(const ValidationConfig& cfg, int n) {
  check_config(cfg);
  if (n < cfg.k_max)
    throw std::invalid_argument("validation sample must be at least the largest pool size");

  const std::vector<SeSp> truth = true_rates(cfg);
  const int replicates = cfg.replicates;
  std::vector<std::uint8_t> meets(static_cast<std::size_t>(replicates));
  std::vector<double> expected(static_cast<std::size_t>(replicates));

  detail::parallel_ranges(replicates, cfg.threads, [&](std::int64_t begin, std::int64_t end) {
    std::vector<std::uint8_t> status;
    std::vector<double> se_hat;
    std::vector<std::uint8_t> se_defined;
    for (std::int64_t i = begin; i < end; ++i) {
      rng::Stream stream(cfg.seed, static_cast<std::uint64_t>(i));
      const ReplicateDecision decision =
          run_replicate(cfg, n, truth, stream, status, se_hat, se_defined);
      meets[static_cast<std::size_t>(i)] = decision.truly_meets_bound ? 1 : 0;
      expected[static_cast<std::size_t>(i)] = decision.expected_tests_true;
    }
  });

  std::int64_t met = 0;
  for (const auto flag : meets) met += flag;
  double sum = 0.0;  // fixed replicate order keeps the mean reproducible
  for (const double e : expected) sum += e;
  return PhiEstimate{static_cast<double>(met) / static_cast<double>(replicates),
                     sum / static_cast<double>(replicates)};
}

ValidationOutcome find_min_validation_n(const ValidationConfig& cfg) {
  check_config(cfg);
  constexpr int kDivergenceCap = 1 << 30;
  if (cfg.n_initial < 1 || cfg.n_initial > kDivergenceCap)
    throw std::invalid_argument("n_initial out of range");

  int n = cfg.n_initial;
  int n_min = 0;
  int n_max = 0;
  std::vector<std::pair<int, double>> trace;

  for (int step = 0; step < cfg.max_steps; ++step) {
    if (n < cfg.k_max)
      throw NoConvergenceError(
          "search drove the validation size below the largest pool size; "
          "phi never enters the target band");
    // >= keeps the doubling branch below free of signed overflow
    if (n >= kDivergenceCap)
      throw NoConvergenceError("validation size diverged; the bound appears unreachable");

    const PhiEstimate phi = estimate_phi(cfg, n);
    trace.emplace_back(n, phi.phi_hat);
    if (cfg.on_step) cfg.on_step(step, n, phi.phi_hat);

    const double gap = phi.phi_hat - cfg.epsilon;
    if (gap > cfg.phi_tolerance) {
      n_max = n;
      n = (n + n_min) / 2;
    } else if (gap < -cfg.phi_tolerance) {
      n_min = n;
      n = n_max == 0 ? 2 * n : (n + n_max) / 2;
    } else {
      ValidationOutcome outcome;
      outcome.n_required = n;
      outcome.t_v = total_validation_tests(n, cfg.k_max);
      outcome.phi_hat = phi.phi_hat;
      outcome.mean_expected_tests = phi.mean_expected_tests;
      if (phi.mean_expected_tests < 1.0)
        outcome.n_star =
            min_population_for_benefit(n, outcome.t_v, phi.mean_expected_tests);
      outcome.bisection_trace = std::move(trace);
      return outcome;
    }
  }
  throw NoConvergenceError("no convergence within the step limit");
}

std::int64_t total_validation_tests(int n, int k_max) {
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  if (n < k_max)
    throw std::invalid_argument("validation sample must be at least the largest pool size");
  std::int64_t total = 0;
  for (int k = 1; k <= k_max; ++k)
    total += (static_cast<std::int64_t>(n) + k - 1) / k;
  return total;
}

std::int64_t min_population_for_benefit(std::int64_t n, std::int64_t t_v,
                                        double expected_tests) {
  if (n < 0 || t_v < 0) throw std::invalid_argument("counts must be nonnegative");
  if (!(expected_tests > 0.0))
    throw std::invalid_argument("expected tests per person must be positive");
  if (expected_tests >= 1.0)
    throw std::domain_error(
        "no break-even population exists: the design needs at least one test per person");
  const double bound = (static_cast<double>(t_v) - static_cast<double>(n) * expected_tests) /
                       (1.0 - expected_tests);
  return static_cast<std::int64_t>(std::ceil(std::max(0.0, bound)));
}

}  // namespace poolplan
