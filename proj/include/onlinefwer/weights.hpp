#pragma once

#include <cstdint>
#include <functional>

namespace onlinefwer {

/// Standardized one-sample statistic z = sqrt(n) * sample mean.
struct OneSampleStat {
  double z = 0.0;
  std::uint32_t n = 1;
};

/// Group means and sizes of a two-sample comparison. Means are assumed to be
/// standardized to unit response variance.
struct TwoSampleStat {
  double mean_x = 0.0;
  double mean_y = 0.0;
  std::uint32_t n1 = 1;
  std::uint32_t n2 = 1;
};

/// Bootstrap size rule m(n). Required: non-decreasing, 1 <= m(n) <= n.
struct ResamplePlan {
  std::function<std::uint32_t(std::uint32_t)> m;

  /// Default rule m(n) = max(1, floor(sqrt(n))).
  static ResamplePlan sqrt_rule();
  static ResamplePlan fixed(std::uint32_t m);

  /// Evaluates the rule and enforces 1 <= m(n) <= n.
  std::uint32_t at(std::uint32_t n) const;
};

/// Threshold rule a_n with its lambda. The sequence should grow without
/// bound while a_n / sqrt(n) -> 0; the default a_n = n^{1/4} does both.
struct ThresholdPlan {
  std::function<double(std::uint32_t)> a;
  double lambda = 0.5;

  static ThresholdPlan fourth_root_rule(double lambda);

  double at(std::uint32_t n) const;
};

enum class WeightVariant { Threshold, BootstrapOneSample, BootstrapTwoSample };

/// Configuration producing a consistent weight from an observed statistic.
struct WeightGenerator {
  WeightVariant variant = WeightVariant::BootstrapOneSample;
  double lambda = 0.5;
  ResamplePlan resample = ResamplePlan::sqrt_rule();

  static WeightGenerator bootstrap_1s(double lambda, ResamplePlan plan = ResamplePlan::sqrt_rule());
  static WeightGenerator bootstrap_2s(double lambda, ResamplePlan plan = ResamplePlan::sqrt_rule());

  /// True when the generator meets the finite-sample error-control
  /// condition for bootstrap weights (lambda >= 0.5).
  bool finite_sample_guarantee() const noexcept;

  void validate() const;
};

/// Threshold weight: 0 if z > a_n, else 1 - lambda.
double threshold_weight(const OneSampleStat& stat, const ThresholdPlan& plan);

/// Low-intensity parametric bootstrap weight for a one-sample statistic:
///   xi = Phi[ Phi^{-1}(1 - lambda) - sqrt(m(n)/n) * z ].
/// This is the exact conditional probability that a bootstrap p-value of
/// size m(n) exceeds lambda, so no resampling is performed.
double bootstrap_weight_1s(const OneSampleStat& stat, const WeightGenerator& gen);

/// Two-sample analogue with shrinkage
///   kappa = sqrt[ (1/n1 + 1/n2) / (1/m(n1) + 1/m(n2)) ]
/// applied to the standardized difference z = (1/n1 + 1/n2)^{-1/2} (mx - my).
/// The formula is evaluated for any group sizes; the consistency limit is
/// only established for asymptotically balanced groups (n1/n2 -> 1).
double bootstrap_weight_2s(const TwoSampleStat& stat, const WeightGenerator& gen);

/// Large-sample limit of the bootstrap weight given the sign of the true
/// mean: 0 for +1, 1 - lambda for 0, 1 for -1.
double weight_limit(int mu_sign, double lambda);

}  // namespace onlinefwer
