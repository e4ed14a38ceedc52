#include "onlinefwer/sim.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "onlinefwer/normal.hpp"

namespace onlinefwer {

void AutocorrScenario::validate() const {
  if (hypotheses < 1) throw std::invalid_argument("AutocorrScenario: hypotheses must be >= 1");
  if (sample_size < 1) throw std::invalid_argument("AutocorrScenario: sample_size must be >= 1");
  if (!(pi1 >= 0.0 && pi1 <= 1.0)) throw std::invalid_argument("AutocorrScenario: pi1 must lie in [0, 1]");
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("AutocorrScenario: rho must lie in [0, 1)");
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("AutocorrScenario: lambda must lie in (0, 1)");
  resample.at(sample_size);
}

void PlatformScenario::validate() const {
  if (treatments < 1) throw std::invalid_argument("PlatformScenario: treatments must be >= 1");
  if (sample_size < 1) throw std::invalid_argument("PlatformScenario: sample_size must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("PlatformScenario: sigma must be positive");
  if (!(rate > 0.0)) throw std::invalid_argument("PlatformScenario: rate must be positive");
  if (!(entry_spacing >= 0.0)) throw std::invalid_argument("PlatformScenario: entry_spacing must be >= 0");
  if (!(pi1 >= 0.0 && pi1 <= 1.0)) throw std::invalid_argument("PlatformScenario: pi1 must lie in [0, 1]");
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("PlatformScenario: lambda must lie in (0, 1)");
  const double start = rate * entry_spacing;
  if (std::fabs(start - std::round(start)) > 1e-9) {
    throw std::invalid_argument("PlatformScenario: rate * entry_spacing must be an integer patient count");
  }
  resample.at(sample_size);
}

std::uint64_t PlatformScenario::control_window_start(std::uint32_t arm) const {
  return static_cast<std::uint64_t>(std::llround(rate * entry_spacing)) * (arm - 1);
}

std::uint64_t PlatformScenario::control_count() const {
  return control_window_start(treatments) + sample_size;
}

std::uint64_t PlatformScenario::control_overlap(std::uint32_t arm_a, std::uint32_t arm_b) const {
  const std::uint64_t a = control_window_start(arm_a);
  const std::uint64_t b = control_window_start(arm_b);
  const std::uint64_t lo = std::max(a, b);
  const std::uint64_t hi = std::min(a, b) + sample_size;
  return hi > lo ? hi - lo : 0;
}

StreamData simulate_autocorr_stream(const AutocorrScenario& scenario, CounterRng& rng) {
  scenario.validate();
  const std::uint32_t n_hyp = scenario.hypotheses;
  const double mu_alt = scenario.alternative_mean();
  const WeightGenerator gen = WeightGenerator::bootstrap_1s(scenario.lambda, scenario.resample);

  StreamData data;
  data.sample_size = scenario.sample_size;
  data.is_null.resize(n_hyp);
  data.z.resize(n_hyp);
  data.p.resize(n_hyp);
  data.weight.resize(n_hyp);

  for (std::uint32_t i = 0; i < n_hyp; ++i) data.is_null[i] = rng.bernoulli(scenario.pi1) ? 0 : 1;

  // AR(1) recursion: exact draw from the rho^{|i-j|} covariance.
  const double innovation_sd = std::sqrt(1.0 - scenario.rho * scenario.rho);
  double centered_prev = 0.0;
  for (std::uint32_t i = 0; i < n_hyp; ++i) {
    const double eps = rng.gaussian();
    const double centered = (i == 0) ? eps : scenario.rho * centered_prev + innovation_sd * eps;
    centered_prev = centered;
    const double mu = data.is_null[i] ? 0.0 : mu_alt;
    const double z = mu + centered;
    data.z[i] = z;
    data.p[i] = 1.0 - normal_cdf(z);
    data.weight[i] = bootstrap_weight_1s(OneSampleStat{z, scenario.sample_size}, gen);
  }
  return data;
}

StreamData simulate_platform_stream(const PlatformScenario& scenario, CounterRng& rng) {
  scenario.validate();
  const std::uint32_t n_arm = scenario.sample_size;
  const std::uint32_t n_trt = scenario.treatments;
  const WeightGenerator gen = WeightGenerator::bootstrap_2s(scenario.lambda, scenario.resample);

  StreamData data;
  data.sample_size = n_arm;
  data.is_null.resize(n_trt);
  data.z.resize(n_trt);
  data.p.resize(n_trt);
  data.weight.resize(n_trt);

  for (std::uint32_t i = 0; i < n_trt; ++i) data.is_null[i] = rng.bernoulli(scenario.pi1) ? 0 : 1;

  // Patient-level responses; only arm means are retained.
  std::vector<double> arm_mean(n_trt);
  for (std::uint32_t i = 0; i < n_trt; ++i) {
    const double mu = data.is_null[i] ? 0.0 : scenario.effect;
    double sum = 0.0;
    for (std::uint32_t j = 0; j < n_arm; ++j) sum += mu + scenario.sigma * rng.gaussian();
    arm_mean[i] = sum / n_arm;
  }

  // Rolling control stream (mean 0), prefix sums for window means.
  const std::uint64_t n_ctrl = scenario.control_count();
  std::vector<double> ctrl_prefix(n_ctrl + 1, 0.0);
  for (std::uint64_t k = 0; k < n_ctrl; ++k) {
    ctrl_prefix[k + 1] = ctrl_prefix[k] + scenario.sigma * rng.gaussian();
  }

  const double scale = std::sqrt(static_cast<double>(n_arm) / 2.0) / scenario.sigma;
  for (std::uint32_t i = 0; i < n_trt; ++i) {
    const std::uint64_t start = scenario.control_window_start(i + 1);
    const double ctrl_mean = (ctrl_prefix[start + n_arm] - ctrl_prefix[start]) / n_arm;
    const double z = scale * (arm_mean[i] - ctrl_mean);
    data.z[i] = z;
    data.p[i] = 1.0 - normal_cdf(z);
    data.weight[i] = bootstrap_weight_2s(
        TwoSampleStat{arm_mean[i] / scenario.sigma, ctrl_mean / scenario.sigma, n_arm, n_arm}, gen);
  }
  return data;
}

ReplicationOutcome run_replication(const StreamData& data, const ProcedureConfig& config, bool keep_records) {
  Session session = make_session(config);
  ReplicationOutcome outcome;
  if (keep_records) outcome.records.reserve(data.p.size());
  for (std::size_t i = 0; i < data.p.size(); ++i) {
    const double level = session.next_level();
    const DecisionRecord decision =
        session.report(PValueRecord{data.p[i], data.weight[i], data.sample_size});
    const bool is_null = data.is_null[i] != 0;
    if (is_null) {
      if (decision.rejected) outcome.any_false_rejection = true;
    } else {
      ++outcome.false_nulls;
      if (decision.rejected) ++outcome.true_rejections;
    }
    if (keep_records) {
      outcome.records.push_back(
          HypothesisRecord{HypothesisTruth{is_null}, data.p[i], data.weight[i], level, decision.rejected});
    }
  }
  return outcome;
}

ReplicationOutcome run_autocorr_replication(const AutocorrScenario& scenario, const ProcedureConfig& config,
                                            CounterRng& rng) {
  return run_replication(simulate_autocorr_stream(scenario, rng), config, /*keep_records=*/true);
}

ReplicationOutcome run_platform_replication(const PlatformScenario& scenario, const ProcedureConfig& config,
                                            CounterRng& rng) {
  return run_replication(simulate_platform_stream(scenario, rng), config, /*keep_records=*/true);
}

unsigned resolve_parallelism(unsigned requested) noexcept {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

namespace {
StreamData simulate_stream(const AutocorrScenario& s, CounterRng& rng) { return simulate_autocorr_stream(s, rng); }
StreamData simulate_stream(const PlatformScenario& s, CounterRng& rng) { return simulate_platform_stream(s, rng); }
}  // namespace

std::vector<std::vector<ReplicationOutcome>> run_study(const Scenario& scenario,
                                                       std::span<const ProcedureConfig> procedures,
                                                       const StudyOptions& options) {
  if (procedures.empty()) throw std::invalid_argument("run_study: no procedures");
  if (options.replications < 1) throw std::invalid_argument("run_study: replications must be >= 1");
  for (const ProcedureConfig& cfg : procedures) cfg.validate();
  std::visit([](const auto& s) { s.validate(); }, scenario);
  const std::uint64_t seed = std::visit([](const auto& s) { return s.seed; }, scenario);

  std::vector<std::vector<ReplicationOutcome>> results(procedures.size());
  for (auto& per_proc : results) per_proc.resize(options.replications);

  const auto worker_body = [&](std::uint32_t rep) {
    CounterRng rng(seed, rep);
    const StreamData data = std::visit(
        [&rng](const auto& s) { return simulate_stream(s, rng); }, scenario);
    for (std::size_t p = 0; p < procedures.size(); ++p) {
      results[p][rep] = run_replication(data, procedures[p], options.keep_records);
    }
  };

  const unsigned workers =
      std::min<unsigned>(resolve_parallelism(options.parallelism), options.replications);
  if (workers <= 1) {
    for (std::uint32_t rep = 0; rep < options.replications; ++rep) worker_body(rep);
  } else {
    std::atomic<std::uint32_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::uint32_t rep = next.fetch_add(1, std::memory_order_relaxed);
          if (rep >= options.replications) return;
          worker_body(rep);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  return results;
}

}  // namespace onlinefwer
