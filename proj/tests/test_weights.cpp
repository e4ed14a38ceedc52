#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "onlinefwer/normal.hpp"
#include "onlinefwer/rng.hpp"
#include "onlinefwer/weights.hpp"
#include "oracles.hpp"

using namespace onlinefwer;

TEST_CASE("default plans") {
  const ResamplePlan plan = ResamplePlan::sqrt_rule();
  CHECK(plan.at(100) == 10);
  CHECK(plan.at(10) == 3);
  CHECK(plan.at(1) == 1);  // clamped
  CHECK(plan.at(2) == 1);
  CHECK(plan.at(1000000) == 1000);

  const ThresholdPlan tplan = ThresholdPlan::fourth_root_rule(0.5);
  CHECK(tplan.at(16) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(tplan.at(10000) == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("resample plan bounds") {
  CHECK_THROWS_AS(ResamplePlan::fixed(50).at(10), std::invalid_argument);
  CHECK(ResamplePlan::fixed(10).at(100) == 10);
}

TEST_CASE("threshold weight") {
  const ThresholdPlan plan = ThresholdPlan::fourth_root_rule(0.5);
  CHECK(threshold_weight(OneSampleStat{0.0, 100}, plan) == 0.5);
  CHECK(threshold_weight(OneSampleStat{10.0, 16}, plan) == 0.0);
  // Boundary z = a_n is inclusive.
  CHECK(threshold_weight(OneSampleStat{2.0, 16}, plan) == 0.5);

  const ThresholdPlan plan03 = ThresholdPlan::fourth_root_rule(0.3);
  CHECK(threshold_weight(OneSampleStat{0.0, 100}, plan03) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("one-sample bootstrap weight closed form") {
  const WeightGenerator gen = WeightGenerator::bootstrap_1s(0.5);
  CHECK(bootstrap_weight_1s(OneSampleStat{0.0, 100}, gen) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(bootstrap_weight_1s(OneSampleStat{0.0, 7}, gen) == doctest::Approx(0.5).epsilon(1e-15));

  const WeightGenerator gen03 = WeightGenerator::bootstrap_1s(0.3);
  CHECK(bootstrap_weight_1s(OneSampleStat{0.0, 100}, gen03) == doctest::Approx(0.7).epsilon(1e-13));

  // n=100, m=10: Phi(-sqrt(0.1) * 3)
  const double expected = normal_cdf(-std::sqrt(0.1) * 3.0);
  CHECK(bootstrap_weight_1s(OneSampleStat{3.0, 100}, gen) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(expected == doctest::Approx(0.17137).epsilon(1e-4));
}

TEST_CASE("one-sample bootstrap weight agrees with a literal resampling oracle") {
  const WeightGenerator gen = WeightGenerator::bootstrap_1s(0.5);
  CounterRng rng(99, 0);
  const auto mc = oracles::mc_bootstrap_weight_1s(3.0, 100, 10, 0.5, 1000000, rng);
  const double closed = bootstrap_weight_1s(OneSampleStat{3.0, 100}, gen);
  CHECK(std::fabs(closed - mc.value) < 3.0 * mc.se);
}

TEST_CASE("two-sample bootstrap weight") {
  const WeightGenerator gen = WeightGenerator::bootstrap_2s(0.5);
  CHECK(bootstrap_weight_2s(TwoSampleStat{1.3, 1.3, 100, 100}, gen) == doctest::Approx(0.5).epsilon(1e-15));

  // Balanced design reduces to the one-sample shrinkage sqrt(m/n).
  const WeightGenerator gen1 = WeightGenerator::bootstrap_1s(0.5);
  for (double z : {-2.0, -0.3, 0.0, 0.7, 1.9, 3.4}) {
    const double mean_diff = z * std::sqrt(2.0 / 100.0);
    const double two = bootstrap_weight_2s(TwoSampleStat{mean_diff, 0.0, 100, 100}, gen);
    const double one = bootstrap_weight_1s(OneSampleStat{z, 100}, gen1);
    CHECK(two == doctest::Approx(one).epsilon(1e-12));
  }

  // Z_n = 2 with n=100, m=10 each: Phi(-sqrt(0.1) * 2) ~ 0.26354.
  const double mean_diff = 2.0 * std::sqrt(2.0 / 100.0);
  const double w = bootstrap_weight_2s(TwoSampleStat{mean_diff, 0.0, 100, 100}, gen);
  CHECK(w == doctest::Approx(0.26354).epsilon(1e-4));
  CounterRng rng(100, 0);
  const auto mc = oracles::mc_bootstrap_weight_2s(mean_diff, 0.0, 10, 10, 0.5, 1000000, rng);
  CHECK(std::fabs(w - mc.value) < 3.0 * mc.se);
}

TEST_CASE("weight limits") {
  CHECK(weight_limit(+1, 0.5) == 0.0);
  CHECK(weight_limit(0, 0.5) == 0.5);
  CHECK(weight_limit(-1, 0.3) == 1.0);
  CHECK(weight_limit(0, 0.3) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("bootstrap weight is strictly decreasing and continuous in z") {
  const WeightGenerator gen = WeightGenerator::bootstrap_1s(0.4);
  double prev = bootstrap_weight_1s(OneSampleStat{-6.0, 100}, gen);
  for (double z = -5.9; z <= 6.0; z += 0.1) {
    const double cur = bootstrap_weight_1s(OneSampleStat{z, 100}, gen);
    CHECK(cur < prev);
    CHECK(std::fabs(cur - prev) < 0.05);  // no jumps on a 0.1 grid
    CHECK(cur >= 0.0);
    CHECK(cur <= 1.0);
    prev = cur;
  }
}

TEST_CASE("threshold weight is a non-increasing step in z") {
  const ThresholdPlan plan = ThresholdPlan::fourth_root_rule(0.5);
  double prev = threshold_weight(OneSampleStat{-6.0, 100}, plan);
  for (double z = -5.9; z <= 6.0; z += 0.1) {
    const double cur = threshold_weight(OneSampleStat{z, 100}, plan);
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("weights stay in [0,1] over random inputs") {
  CounterRng rng(7, 3);
  const WeightGenerator gen = WeightGenerator::bootstrap_1s(0.5);
  for (int i = 0; i < 2000; ++i) {
    const double z = rng.uniform(-50.0, 50.0);
    const auto n = static_cast<std::uint32_t>(1 + rng.next_u64() % 100000);
    const double w = bootstrap_weight_1s(OneSampleStat{z, n}, gen);
    CHECK(w >= 0.0);
    CHECK(w <= 1.0);
  }
}

TEST_CASE("empirical consistency of bootstrap weights") {
  const double lambda = 0.5;
  const WeightGenerator gen = WeightGenerator::bootstrap_1s(lambda);
  CounterRng rng(2718, 0);

  const auto median_weight = [&](double mu, std::uint32_t n) {
    std::vector<double> draws;
    draws.reserve(1000);
    const double root_n_mu = std::sqrt(static_cast<double>(n)) * mu;
    for (int k = 0; k < 1000; ++k) {
      const double z = root_n_mu + rng.gaussian();
      draws.push_back(bootstrap_weight_1s(OneSampleStat{z, n}, gen));
    }
    std::nth_element(draws.begin(), draws.begin() + 500, draws.end());
    return draws[500];
  };

  // Under the alternative the weight collapses toward 0 as n grows; first at
  // the deterministic point z = sqrt(n) mu, then over noisy draws.
  double prev = 1.0;
  for (const std::uint32_t n : {100u, 10000u, 1000000u}) {
    const double at_mean =
        bootstrap_weight_1s(OneSampleStat{std::sqrt(static_cast<double>(n)) * 0.5, n}, gen);
    CHECK(at_mean < prev);
    prev = at_mean;
  }
  CHECK(prev < 1e-9);

  const double m100 = median_weight(0.5, 100);
  const double m10k = median_weight(0.5, 10000);
  const double m1m = median_weight(0.5, 1000000);
  CHECK(m100 > m10k);
  CHECK(m10k > m1m);
  CHECK(m1m < 0.01);

  // Under the exact null the weight concentrates at 1 - lambda.
  CHECK(std::fabs(median_weight(0.0, 1000000) - (1.0 - lambda)) < 0.02);
}

TEST_CASE("null expectation of the bootstrap weight") {
  // For z ~ N(0,1) the mean weight is Phi(Phi^{-1}(1-lambda) / sqrt(1 + m/n));
  // for lambda >= 0.5 it is therefore at least 1 - lambda.
  for (const double lambda : {0.5, 0.6, 0.75}) {
    for (const std::uint32_t n : {25u, 100u, 10000u}) {
      const WeightGenerator gen = WeightGenerator::bootstrap_1s(lambda);
      const double m = gen.resample.at(n);
      const auto integrand = [&](double z) {
        return bootstrap_weight_1s(OneSampleStat{z, n}, gen) * normal_pdf(z);
      };
      const double numeric = oracles::simpson(integrand, -12.0, 12.0, 4800);
      const double closed = normal_cdf(normal_quantile(1.0 - lambda) / std::sqrt(1.0 + m / n));
      CHECK(numeric == doctest::Approx(closed).epsilon(1e-6));
      CHECK(numeric >= 1.0 - lambda - 1e-9);
    }
  }
}

TEST_CASE("finite-sample guarantee flag") {
  CHECK(WeightGenerator::bootstrap_1s(0.5).finite_sample_guarantee());
  CHECK(WeightGenerator::bootstrap_2s(0.7).finite_sample_guarantee());
  CHECK_FALSE(WeightGenerator::bootstrap_1s(0.4).finite_sample_guarantee());
}

TEST_CASE("generator validation") {
  CHECK_THROWS_AS(WeightGenerator::bootstrap_1s(0.0), std::invalid_argument);
  CHECK_THROWS_AS(WeightGenerator::bootstrap_1s(1.0), std::invalid_argument);
  const WeightGenerator two = WeightGenerator::bootstrap_2s(0.5);
  CHECK_THROWS_AS(bootstrap_weight_1s(OneSampleStat{0.0, 100}, two), std::invalid_argument);
  const WeightGenerator one = WeightGenerator::bootstrap_1s(0.5);
  CHECK_THROWS_AS(bootstrap_weight_2s(TwoSampleStat{0.0, 0.0, 100, 100}, one), std::invalid_argument);
}
