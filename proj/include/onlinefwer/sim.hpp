#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "onlinefwer/core.hpp"
#include "onlinefwer/procedures.hpp"
#include "onlinefwer/rng.hpp"
#include "onlinefwer/weights.hpp"

namespace onlinefwer {

/// Stream of autocorrelated z-scores: (Z_1..Z_N) ~ N(mu, Sigma) with
/// Sigma_{ij} = rho^{|i-j|}, mu_i = effect with probability pi1 else 0.
/// Weights come from the one-sample low-intensity bootstrap at the nominal
/// sample size n.
struct AutocorrScenario {
  std::uint32_t hypotheses = 1000;  // N
  std::uint32_t sample_size = 100;  // n
  double pi1 = 0.1;
  double rho = 0.8;
  double effect = 5.0;  // z-score mean under the alternative
  /// When set, the alternative is a data-scale effect c / sqrt(n), i.e. a
  /// z-score mean of c independent of the sample size.
  std::optional<double> effect_scale_c;
  double lambda = 0.5;
  ResamplePlan resample = ResamplePlan::sqrt_rule();
  std::uint64_t seed = 1;

  void validate() const;
  double alternative_mean() const noexcept { return effect_scale_c ? *effect_scale_c : effect; }
};

/// Platform trial: treatment arms enter at t_i = entry_spacing * (i - 1),
/// recruit `rate` patients per unit time per arm, and are compared against
/// the control patients recruited during their own active window.
struct PlatformScenario {
  std::uint32_t treatments = 50;    // N
  std::uint32_t sample_size = 100;  // n patients per arm at analysis
  double sigma = 1.0;
  double rate = 10.0;
  double entry_spacing = 2.0;
  double pi1 = 0.2;
  double effect = 0.5;  // response mean of an effective treatment
  double lambda = 0.5;
  ResamplePlan resample = ResamplePlan::sqrt_rule();
  std::uint64_t seed = 1;

  void validate() const;
  double arm_duration() const noexcept { return static_cast<double>(sample_size) / rate; }
  /// First control index recruited during arm i's window (1-based arm).
  std::uint64_t control_window_start(std::uint32_t arm) const;
  std::uint64_t control_count() const;
  /// Number of shared control patients between two arms.
  std::uint64_t control_overlap(std::uint32_t arm_a, std::uint32_t arm_b) const;
};

using Scenario = std::variant<AutocorrScenario, PlatformScenario>;

/// One simulated testing stream (shared by every procedure in a paired run).
struct StreamData {
  std::vector<std::uint8_t> is_null;
  std::vector<double> z;
  std::vector<double> p;
  std::vector<double> weight;
  std::uint32_t sample_size = 1;
};

StreamData simulate_autocorr_stream(const AutocorrScenario& scenario, CounterRng& rng);
StreamData simulate_platform_stream(const PlatformScenario& scenario, CounterRng& rng);

struct HypothesisRecord {
  HypothesisTruth truth;
  double p = 1.0;
  double weight = 1.0;
  double level = 0.0;
  bool rejected = false;
};

struct ReplicationOutcome {
  bool any_false_rejection = false;
  std::uint32_t true_rejections = 0;  // rejected false nulls
  std::uint32_t false_nulls = 0;      // hypotheses with a true effect
  std::vector<HypothesisRecord> records;  // filled only when requested
};

/// Drives one procedure over a simulated stream through the session protocol.
ReplicationOutcome run_replication(const StreamData& data, const ProcedureConfig& config,
                                   bool keep_records = false);

ReplicationOutcome run_autocorr_replication(const AutocorrScenario& scenario, const ProcedureConfig& config,
                                            CounterRng& rng);
ReplicationOutcome run_platform_replication(const PlatformScenario& scenario, const ProcedureConfig& config,
                                            CounterRng& rng);

struct StudyOptions {
  std::uint32_t replications = 1;
  unsigned parallelism = 0;  // 0: one worker per hardware thread
  bool keep_records = false;
};

/// Runs R independent replications per procedure. Replication r draws from
/// the (scenario seed, r) stream, and every procedure sees the same data
/// within a replication. Results are indexed [procedure][replication] and do
/// not depend on the parallelism degree.
std::vector<std::vector<ReplicationOutcome>> run_study(const Scenario& scenario,
                                                       std::span<const ProcedureConfig> procedures,
                                                       const StudyOptions& options);

unsigned resolve_parallelism(unsigned requested) noexcept;

}  // namespace onlinefwer
