#include <cmath>

#include <doctest.h>

#include "oracles.hpp"
#include "poolplan/model.hpp"
#include "poolplan/rng.hpp"

using namespace poolplan;

TEST_SUITE_BEGIN("model");

TEST_CASE("domain types reject degenerate values") {
  CHECK_THROWS_AS(Prevalence(0.0), std::invalid_argument);
  CHECK_THROWS_AS(Prevalence(1.0), std::invalid_argument);
  CHECK_THROWS_AS(Prevalence(-0.2), std::invalid_argument);
  CHECK_THROWS_AS(GroupSize(0), std::invalid_argument);
  CHECK_THROWS_AS(GroupSize(-4), std::invalid_argument);
  CHECK_NOTHROW(Prevalence(1e-12));
  CHECK_NOTHROW(GroupSize(1));
}

TEST_CASE("pool positive probability matches the closed form") {
  // 0.906 * (1 - 0.9^4)
  CHECK(pool_positive_prob(Prevalence(0.1), GroupSize(4), 0.906, 1.0) ==
        doctest::Approx(0.3115734).epsilon(1e-9));
  // single perfect test equals prevalence
  CHECK(pool_positive_prob(Prevalence(0.5), GroupSize(1), 1.0, 1.0) == doctest::Approx(0.5));
  // zero sensitivity and perfect specificity: no positives possible
  CHECK(pool_positive_prob(Prevalence(0.1), GroupSize(2), 0.0, 1.0) == doctest::Approx(0.0));

  CHECK_THROWS_AS(pool_positive_prob(Prevalence(0.1), GroupSize(2), 1.2, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(pool_positive_prob(Prevalence(0.1), GroupSize(2), 0.9, -0.1),
                  std::invalid_argument);
}

TEST_CASE("expected tests per person") {
  CHECK(expected_tests(Prevalence(0.1), GroupSize(4), 0.906, 1.0) ==
        doctest::Approx(0.562).epsilon(0.001));
  CHECK(expected_tests(Prevalence(0.01), GroupSize(11), 1.0, 1.0) ==
        doctest::Approx(0.196).epsilon(0.003));
  // k = 1 is individual testing by definition, whatever the rates say
  CHECK(expected_tests(Prevalence(0.37), GroupSize(1), 0.4, 0.7) == 1.0);
  CHECK(expected_tests(Prevalence(0.999), GroupSize(1), 1.0, 1.0) == 1.0);
}

TEST_CASE("brute-force enumeration agrees with the closed forms for k <= 6") {
  const double prevalences[] = {0.01, 0.1, 0.3, 0.5, 0.9};
  const double rates[][2] = {{1.0, 1.0}, {0.906, 1.0}, {0.8, 0.7}, {0.5, 0.5}, {0.0, 1.0}, {0.3, 0.9}};
  for (double p : prevalences) {
    for (int k = 1; k <= 6; ++k) {
      for (const auto& r : rates) {
        const auto law = oracle::enumerate_pool(p, k, r[0], r[1]);
        CHECK(std::abs(pool_positive_prob(Prevalence(p), GroupSize(k), r[0], r[1]) -
                       law.pool_positive) <= 1e-12);
        CHECK(std::abs(expected_tests(Prevalence(p), GroupSize(k), r[0], r[1]) -
                       law.tests_per_person) <= 1e-12);
      }
    }
  }
}

TEST_CASE("perfect test reduces to 1 - (1-p)^k") {
  for (double p : {0.001, 0.05, 0.25, 0.8}) {
    for (int k = 1; k <= 40; ++k) {
      const double direct = 1.0 - std::pow(1.0 - p, k);
      CHECK(pool_positive_prob(Prevalence(p), GroupSize(k), 1.0, 1.0) ==
            doctest::Approx(direct).epsilon(1e-12));
    }
  }
}

TEST_CASE("expected tests is monotone in se and p, and bounded") {
  rng::Stream stream(20240229, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + static_cast<int>(stream.below(29));
    const double p_lo = 0.001 + 0.5 * stream.uniform01();
    const double p_hi = p_lo + (0.998 - p_lo) * (0.05 + 0.95 * stream.uniform01());
    const double se_lo = 0.05 + 0.5 * stream.uniform01();
    const double se_hi = se_lo + (1.0 - se_lo) * (0.05 + 0.95 * stream.uniform01());

    const double base = expected_tests(Prevalence(p_lo), GroupSize(k), se_lo, 1.0);
    CHECK(base < expected_tests(Prevalence(p_lo), GroupSize(k), se_hi, 1.0));
    CHECK(base < expected_tests(Prevalence(p_hi), GroupSize(k), se_lo, 1.0));

    CHECK(base >= 1.0 / k);
    CHECK(base <= 1.0 + 1.0 / k);
  }
}

TEST_CASE("overall sensitivity of the two-stage procedure") {
  const MisclassModel hwang075{FamilySpec::hwang(0.075), FamilySpec::perfect()};
  CHECK(overall_sensitivity({Prevalence(0.1), GroupSize(4), hwang075}) ==
        doctest::Approx(0.906).epsilon(0.0006));
  CHECK(overall_sensitivity({Prevalence(0.01), GroupSize(12), hwang075}) ==
        doctest::Approx(0.831).epsilon(0.0007));
  CHECK(overall_sensitivity({Prevalence(0.4), GroupSize(1), hwang075}) == 1.0);

  // When the model degrades the individual test too, both stages count.
  const MisclassModel tab{FamilySpec::tabulated({0.9, 0.8}), FamilySpec::perfect()};
  CHECK(overall_sensitivity({Prevalence(0.2), GroupSize(2), tab}) == doctest::Approx(0.72));
  CHECK(overall_sensitivity({Prevalence(0.2), GroupSize(1), tab}) == doctest::Approx(0.9));
}

TEST_CASE("design metrics bundle") {
  const MisclassModel hwang075{FamilySpec::hwang(0.075), FamilySpec::perfect()};
  const DesignMetrics m = design_metrics({Prevalence(0.05), GroupSize(6), hwang075});
  CHECK(m.expected_tests_per_person == doctest::Approx(0.399).epsilon(0.002));
  CHECK(m.overall_sensitivity == doctest::Approx(0.877).epsilon(0.001));
  CHECK(m.overall_specificity_lower_bound == 1.0);

  const DesignMetrics individual =
      design_metrics({Prevalence(0.3), GroupSize(1), MisclassModel{FamilySpec::perfect()}});
  CHECK(individual.expected_tests_per_person == 1.0);
  CHECK(individual.overall_sensitivity == 1.0);
  CHECK(individual.overall_specificity_lower_bound == 1.0);

  const MisclassModel hwang03{FamilySpec::hwang(0.3), FamilySpec::perfect()};
  const DesignMetrics deep = design_metrics({Prevalence(0.1), GroupSize(25), hwang03});
  CHECK(deep.expected_tests_per_person == doctest::Approx(0.424).epsilon(0.002));
  CHECK(deep.overall_sensitivity == doctest::Approx(0.414).epsilon(0.002));

  // Imperfect specificity at both stages: bound is 1 - (1-Sp(k))(1-Sp(1)).
  const MisclassModel leaky{FamilySpec::perfect(), FamilySpec::tabulated({0.9, 0.8, 0.7})};
  const DesignMetrics lb = design_metrics({Prevalence(0.1), GroupSize(3), leaky});
  CHECK(lb.overall_specificity_lower_bound == doctest::Approx(1.0 - 0.3 * 0.1));
}

TEST_SUITE_END();
