#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "onlinefwer/metrics.hpp"
#include "onlinefwer/sim.hpp"

using namespace onlinefwer;

namespace {

const ProcedureConfig kGraph =
    ProcedureConfig::continuous_graph(0.05, ParamSequence::constant(0.5), SpendingSequence::inverse_square(), true);

struct PairStats {
  double corr = 0.0;
  double cov = 0.0;
  double se_cov = 0.0;  // MC standard error of the covariance estimate
};

// Sample correlation/covariance of (z[i], z[j]) across replications.
PairStats pair_stats(const std::vector<std::pair<double, double>>& samples) {
  const auto n = static_cast<double>(samples.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : samples) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0, s4 = 0.0;
  for (const auto& [x, y] : samples) {
    const double dx = x - mx, dy = y - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
    s4 += dx * dx * dy * dy;
  }
  PairStats out;
  out.cov = sxy / (n - 1.0);
  out.corr = sxy / std::sqrt(sxx * syy);
  const double var_of_products = s4 / n - (sxy / n) * (sxy / n);
  out.se_cov = std::sqrt(var_of_products / n);
  return out;
}

}  // namespace

TEST_CASE("autocorrelated stream has the configured dependence") {
  AutocorrScenario scenario;
  scenario.hypotheses = 40;
  scenario.sample_size = 100;
  scenario.pi1 = 0.0;  // all nulls: marginals are standard normal
  scenario.seed = 7;

  for (const double rho : {0.0, 0.8}) {
    scenario.rho = rho;
    std::vector<std::pair<double, double>> lag1, lag3;
    double sum = 0.0, sum_sq = 0.0;
    const std::size_t reps = 10000;
    for (std::size_t r = 0; r < reps; ++r) {
      CounterRng rng(scenario.seed, r);
      const StreamData data = simulate_autocorr_stream(scenario, rng);
      lag1.emplace_back(data.z[10], data.z[11]);
      lag3.emplace_back(data.z[10], data.z[13]);
      sum += data.z[10];
      sum_sq += data.z[10] * data.z[10];
    }
    const double mean = sum / reps;
    const double var = sum_sq / reps - mean * mean;
    CHECK(std::fabs(mean) < 3.0 / std::sqrt(static_cast<double>(reps)));
    CHECK(std::fabs(var - 1.0) < 3.0 * std::sqrt(2.0 / static_cast<double>(reps)));

    const PairStats s1 = pair_stats(lag1);
    const PairStats s3 = pair_stats(lag3);
    // se(corr) ~ (1 - rho^2) / sqrt(reps)
    CHECK(std::fabs(s1.corr - rho) < 3.0 * (1.0 - rho * rho + 0.01) / std::sqrt(static_cast<double>(reps)));
    CHECK(std::fabs(s3.corr - rho * rho * rho) < 3.5 / std::sqrt(static_cast<double>(reps)));
  }
}

TEST_CASE("autocorr stream weights and p-values come from the z-scores") {
  AutocorrScenario scenario;
  scenario.hypotheses = 25;
  scenario.pi1 = 0.3;
  scenario.seed = 3;
  CounterRng rng(scenario.seed, 0);
  const StreamData data = simulate_autocorr_stream(scenario, rng);
  const WeightGenerator gen = WeightGenerator::bootstrap_1s(scenario.lambda, scenario.resample);
  for (std::size_t i = 0; i < data.z.size(); ++i) {
    CHECK(data.p[i] == doctest::Approx(1.0 - normal_cdf(data.z[i])).epsilon(1e-15));
    CHECK(data.weight[i] ==
          doctest::Approx(bootstrap_weight_1s(OneSampleStat{data.z[i], scenario.sample_size}, gen))
              .epsilon(1e-15));
  }
}

TEST_CASE("platform control windows") {
  PlatformScenario scenario;
  scenario.treatments = 6;
  CHECK(scenario.arm_duration() == doctest::Approx(10.0));
  CHECK(scenario.control_window_start(1) == 0);
  CHECK(scenario.control_window_start(2) == 20);
  CHECK(scenario.control_count() == 200);
  CHECK(scenario.control_overlap(1, 2) == 80);
  CHECK(scenario.control_overlap(1, 5) == 20);
  CHECK(scenario.control_overlap(1, 6) == 0);  // disjoint windows
  CHECK(scenario.control_overlap(2, 2) == 100);
}

TEST_CASE("platform z-scores match the analytic covariance") {
  PlatformScenario scenario;
  scenario.treatments = 6;
  scenario.pi1 = 0.0;
  scenario.seed = 11;

  std::vector<std::pair<double, double>> lag1, lag5;
  double sum = 0.0, sum_sq = 0.0;
  const std::size_t reps = 10000;
  for (std::size_t r = 0; r < reps; ++r) {
    CounterRng rng(scenario.seed, r);
    const StreamData data = simulate_platform_stream(scenario, rng);
    lag1.emplace_back(data.z[0], data.z[1]);
    lag5.emplace_back(data.z[0], data.z[5]);
    sum += data.z[2];
    sum_sq += data.z[2] * data.z[2];
  }
  // E[Z] = 0 and var[Z] = 1 under the global null.
  const double mean = sum / reps;
  CHECK(std::fabs(mean) < 3.0 / std::sqrt(static_cast<double>(reps)));
  CHECK(std::fabs(sum_sq / reps - mean * mean - 1.0) < 3.0 * std::sqrt(2.0 / static_cast<double>(reps)));

  // cov(Z_i, Z_k) = |J_i cap J_k| / (2 n); adjacent arms share 80 controls.
  const PairStats s1 = pair_stats(lag1);
  const double expected = static_cast<double>(scenario.control_overlap(1, 2)) / (2.0 * scenario.sample_size);
  CHECK(expected == doctest::Approx(0.4));
  CHECK(std::fabs(s1.cov - expected) < 3.0 * s1.se_cov);

  // Non-overlapping arms are independent.
  const PairStats s5 = pair_stats(lag5);
  CHECK(std::fabs(s5.cov) < 3.0 * s5.se_cov);
}

TEST_CASE("platform effect shifts the mean by the standardized difference") {
  PlatformScenario scenario;
  scenario.treatments = 4;
  scenario.pi1 = 1.0;  // every arm effective
  scenario.effect = 0.5;
  scenario.seed = 13;
  double sum = 0.0;
  const std::size_t reps = 4000;
  for (std::size_t r = 0; r < reps; ++r) {
    CounterRng rng(scenario.seed, r);
    sum += simulate_platform_stream(scenario, rng).z[1];
  }
  // E[Z] = effect / (sigma sqrt(2/n)) = 0.5 * sqrt(50)
  const double expected = 0.5 * std::sqrt(50.0);
  CHECK(std::fabs(sum / reps - expected) < 3.0 / std::sqrt(static_cast<double>(reps)) + 0.05);
}

TEST_CASE("replication outcome bookkeeping") {
  AutocorrScenario scenario;
  scenario.hypotheses = 200;
  scenario.pi1 = 0.4;
  scenario.seed = 17;
  CounterRng rng(scenario.seed, 0);
  const ReplicationOutcome outcome = run_autocorr_replication(scenario, kGraph, rng);
  REQUIRE(outcome.records.size() == 200);

  std::uint32_t false_nulls = 0, true_rejections = 0;
  bool any_false = false;
  for (const HypothesisRecord& rec : outcome.records) {
    CHECK(rec.rejected == (rec.p <= rec.level));
    if (rec.truth.is_null) {
      any_false |= rec.rejected;
    } else {
      ++false_nulls;
      if (rec.rejected) ++true_rejections;
    }
  }
  CHECK(outcome.false_nulls == false_nulls);
  CHECK(outcome.true_rejections == true_rejections);
  CHECK(outcome.any_false_rejection == any_false);
  CHECK(false_nulls > 40);  // pi1 = 0.4 of 200
}

TEST_CASE("pi1 = 0 leaves power undefined") {
  AutocorrScenario scenario;
  scenario.hypotheses = 30;
  scenario.pi1 = 0.0;
  scenario.seed = 19;
  StudyOptions options;
  options.replications = 50;
  const std::vector<ProcedureConfig> procs{kGraph};
  const auto outcomes = run_study(scenario, procs, options);
  const MetricsReport report = aggregate(outcomes[0]);
  CHECK_FALSE(report.power_hat.has_value());
}

TEST_CASE("studies are deterministic and pairing is exact") {
  AutocorrScenario scenario;
  scenario.hypotheses = 50;
  scenario.pi1 = 0.2;
  scenario.seed = 23;

  const std::vector<ProcedureConfig> procs{
      ProcedureConfig::alpha_spending(0.05),
      kGraph,
      ProcedureConfig::continuous_spending(
          0.05, make_interpolation_function(SpendingSequence::inverse_square(), 0.5), true),
  };

  StudyOptions serial;
  serial.replications = 64;
  serial.parallelism = 1;
  serial.keep_records = true;
  const auto a = run_study(scenario, procs, serial);

  StudyOptions threaded = serial;
  threaded.parallelism = 4;
  const auto b = run_study(scenario, procs, threaded);

  REQUIRE(a.size() == b.size());
  for (std::size_t p = 0; p < a.size(); ++p) {
    for (std::size_t r = 0; r < a[p].size(); ++r) {
      REQUIRE(a[p][r].records.size() == b[p][r].records.size());
      for (std::size_t i = 0; i < a[p][r].records.size(); ++i) {
        CHECK(a[p][r].records[i].level == b[p][r].records[i].level);
        CHECK(a[p][r].records[i].p == b[p][r].records[i].p);
        CHECK(a[p][r].records[i].rejected == b[p][r].records[i].rejected);
      }
    }
  }

  // Every procedure sees the same (p, weight, truth) stream per replication.
  for (std::size_t r = 0; r < a[0].size(); ++r) {
    for (std::size_t p = 1; p < a.size(); ++p) {
      for (std::size_t i = 0; i < a[0][r].records.size(); ++i) {
        CHECK(a[0][r].records[i].p == a[p][r].records[i].p);
        CHECK(a[0][r].records[i].weight == a[p][r].records[i].weight);
        CHECK(a[0][r].records[i].truth.is_null == a[p][r].records[i].truth.is_null);
      }
    }
  }
}

TEST_CASE("single replication study") {
  PlatformScenario scenario;
  scenario.treatments = 5;
  scenario.seed = 29;
  StudyOptions options;
  options.replications = 1;
  const std::vector<ProcedureConfig> procs{kGraph};
  const auto outcomes = run_study(scenario, procs, options);
  REQUIRE(outcomes.size() == 1);
  REQUIRE(outcomes[0].size() == 1);
}

TEST_CASE("scenario validation") {
  AutocorrScenario bad;
  bad.rho = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  AutocorrScenario bad2;
  bad2.pi1 = 1.5;
  CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
  PlatformScenario bad3;
  bad3.rate = 10.0;
  bad3.entry_spacing = 0.15;  // 1.5 patients per spacing step
  CHECK_THROWS_AS(bad3.validate(), std::invalid_argument);
}

TEST_CASE("scaled effect pins the z-score mean") {
  AutocorrScenario scenario;
  scenario.effect_scale_c = 3.0;
  scenario.sample_size = 400;
  CHECK(scenario.alternative_mean() == 3.0);
}
