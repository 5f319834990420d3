#include "poolplan/screening.hpp"

#include <cstdio>

#include "parallel.hpp"
#include "poolplan/rng.hpp"

namespace poolplan {

namespace {

// Pools per worker block; fixed so the block split (and with it every random
// draw) is independent of how many threads actually run.
constexpr std::int64_t kPoolsPerBlock = 8192;

struct BlockTally {
  std::int64_t positive_pools = 0;
  std::int64_t tests = 0;
  std::int64_t positives = 0;
  std::int64_t false_negatives = 0;
  std::int64_t false_positives = 0;
};

// Simulates pools [first, last) of the run. Pool `groups - 1` may be the
// short trailing group.
BlockTally run_block(std::int64_t first, std::int64_t last, std::int64_t groups, int k,
                     int short_size, double p, const SeSp& at_k, const SeSp& at_short,
                     const SeSp& at_1, std::uint64_t seed, std::uint64_t block_index) {
  rng::Stream stream(seed, block_index);
  BlockTally tally;
  for (std::int64_t g = first; g < last; ++g) {
    const bool is_short = short_size > 0 && g == groups - 1;
    const int size = is_short ? short_size : k;
    const SeSp& rates = is_short ? at_short : at_k;

    int members_positive = 0;
    for (int i = 0; i < size; ++i) members_positive += stream.bernoulli(p);
    tally.positives += members_positive;
    ++tally.tests;

    if (size == 1) {
      // Degenerate design: a single individual test decides the status.
      const bool flagged = members_positive > 0 ? stream.bernoulli(rates.se)
                                                : stream.bernoulli(1.0 - rates.sp);
      if (members_positive > 0 && !flagged) ++tally.false_negatives;
      if (members_positive == 0 && flagged) ++tally.false_positives;
      continue;
    }

    const bool pool_flagged = members_positive > 0 ? stream.bernoulli(rates.se)
                                                   : stream.bernoulli(1.0 - rates.sp);
    if (!pool_flagged) {
      // Everyone in the pool is declared negative; positives become misses.
      tally.false_negatives += members_positive;
      continue;
    }
    ++tally.positive_pools;
    tally.tests += size;
    for (int i = 0; i < members_positive; ++i)
      if (!stream.bernoulli(at_1.se)) ++tally.false_negatives;
    for (int i = 0; i < size - members_positive; ++i)
      if (stream.bernoulli(1.0 - at_1.sp)) ++tally.false_positives;
  }
  return tally;
}

}  // namespace

ScreenReport simulate_screen(std::int64_t population, Prevalence p, GroupSize k,
                             const MisclassModel& model, std::uint64_t seed, int threads) {
  if (population < k.value())
    throw std::invalid_argument("population must be at least one full group");

  const int size_k = k.value();
  const std::int64_t full = population / size_k;
  const int short_size = static_cast<int>(population % size_k);
  const std::int64_t groups = full + (short_size > 0 ? 1 : 0);

  const SeSp at_k = evaluate(model, p, k);
  const SeSp at_1 = size_k == 1 ? at_k : evaluate(model, p, GroupSize(1));
  const SeSp at_short =
      short_size > 0 ? evaluate(model, p, GroupSize(short_size)) : at_k;

  const std::int64_t blocks = (groups + kPoolsPerBlock - 1) / kPoolsPerBlock;
  std::vector<BlockTally> tallies(static_cast<std::size_t>(blocks));
  detail::parallel_ranges(blocks, threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t b = begin; b < end; ++b) {
      const std::int64_t first = b * kPoolsPerBlock;
      const std::int64_t last = std::min(first + kPoolsPerBlock, groups);
      tallies[static_cast<std::size_t>(b)] =
          run_block(first, last, groups, size_k, short_size, p.value(), at_k, at_short, at_1,
                    seed, static_cast<std::uint64_t>(b));
    }
  });

  ScreenReport report;
  report.population = population;
  report.k = size_k;
  report.groups = groups;
  for (const BlockTally& t : tallies) {
    report.positive_pools += t.positive_pools;
    report.total_tests += t.tests;
    report.positives += t.positives;
    report.false_negatives += t.false_negatives;
    report.false_positives += t.false_positives;
  }
  report.negatives = population - report.positives;
  report.tests_per_person =
      static_cast<double>(report.total_tests) / static_cast<double>(population);
  report.empirical_overall_se =
      report.positives > 0
          ? 1.0 - static_cast<double>(report.false_negatives) /
                      static_cast<double>(report.positives)
          : 1.0;
  report.empirical_overall_sp =
      report.negatives > 0
          ? 1.0 - static_cast<double>(report.false_positives) /
                      static_cast<double>(report.negatives)
          : 1.0;
  return report;
}

std::vector<ScreenReport> sweep(std::int64_t population, Prevalence p,
                                const MisclassModel& model, int k_from, int k_to,
                                std::uint64_t seed, int threads) {
  if (k_from < 1 || k_to < k_from)
    throw std::invalid_argument("need 1 <= k_from <= k_to");
  std::vector<ScreenReport> reports;
  reports.reserve(static_cast<std::size_t>(k_to - k_from + 1));
  for (int k = k_from; k <= k_to; ++k)
    reports.push_back(simulate_screen(population, p, GroupSize(k), model,
                                      rng::derive_seed(seed, static_cast<std::uint64_t>(k)),
                                      threads));
  return reports;
}

void write_sweep_csv(std::ostream& out, const std::vector<ScreenReport>& reports) {
  out << "k,tests_per_person,overall_se,overall_sp,total_tests\n";
  char buffer[160];
  for (const ScreenReport& r : reports) {
    std::snprintf(buffer, sizeof(buffer), "%d,%.6f,%.6f,%.6f,%lld\n", r.k, r.tests_per_person,
                  r.empirical_overall_se, r.empirical_overall_sp,
                  static_cast<long long>(r.total_tests));
    out << buffer;
  }
}

}  // namespace poolplan
