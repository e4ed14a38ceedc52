#include "onlinefwer/weights.hpp"

#include <cmath>
#include <stdexcept>

#include "onlinefwer/normal.hpp"

namespace onlinefwer {

ResamplePlan ResamplePlan::sqrt_rule() {
  ResamplePlan plan;
  plan.m = [](std::uint32_t n) {
    const auto r = static_cast<std::uint32_t>(std::floor(std::sqrt(static_cast<double>(n))));
    return r < 1 ? 1u : r;
  };
  return plan;
}

ResamplePlan ResamplePlan::fixed(std::uint32_t m) {
  ResamplePlan plan;
  plan.m = [m](std::uint32_t) { return m; };
  return plan;
}

std::uint32_t ResamplePlan::at(std::uint32_t n) const {
  if (!m) throw std::invalid_argument("ResamplePlan: empty rule");
  const std::uint32_t value = m(n);
  if (value < 1 || value > n) throw std::invalid_argument("ResamplePlan: m(n) must satisfy 1 <= m(n) <= n");
  return value;
}

ThresholdPlan ThresholdPlan::fourth_root_rule(double lambda) {
  ThresholdPlan plan;
  plan.a = [](std::uint32_t n) { return std::pow(static_cast<double>(n), 0.25); };
  plan.lambda = lambda;
  return plan;
}

double ThresholdPlan::at(std::uint32_t n) const {
  if (!a) throw std::invalid_argument("ThresholdPlan: empty rule");
  const double value = a(n);
  if (!(value > 0.0)) throw std::invalid_argument("ThresholdPlan: a_n must be positive");
  return value;
}

WeightGenerator WeightGenerator::bootstrap_1s(double lambda, ResamplePlan plan) {
  WeightGenerator gen;
  gen.variant = WeightVariant::BootstrapOneSample;
  gen.lambda = lambda;
  gen.resample = std::move(plan);
  gen.validate();
  return gen;
}

WeightGenerator WeightGenerator::bootstrap_2s(double lambda, ResamplePlan plan) {
  WeightGenerator gen;
  gen.variant = WeightVariant::BootstrapTwoSample;
  gen.lambda = lambda;
  gen.resample = std::move(plan);
  gen.validate();
  return gen;
}

bool WeightGenerator::finite_sample_guarantee() const noexcept {
  return variant != WeightVariant::Threshold && lambda >= 0.5;
}

void WeightGenerator::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("WeightGenerator: lambda must lie in (0, 1)");
}

double threshold_weight(const OneSampleStat& stat, const ThresholdPlan& plan) {
  if (!(plan.lambda > 0.0 && plan.lambda < 1.0)) {
    throw std::invalid_argument("ThresholdPlan: lambda must lie in (0, 1)");
  }
  return stat.z > plan.at(stat.n) ? 0.0 : 1.0 - plan.lambda;
}

double bootstrap_weight_1s(const OneSampleStat& stat, const WeightGenerator& gen) {
  gen.validate();
  if (gen.variant != WeightVariant::BootstrapOneSample) {
    throw std::invalid_argument("bootstrap_weight_1s: generator is not the one-sample bootstrap variant");
  }
  const double ratio = static_cast<double>(gen.resample.at(stat.n)) / static_cast<double>(stat.n);
  return normal_cdf(normal_quantile(1.0 - gen.lambda) - std::sqrt(ratio) * stat.z);
}

double bootstrap_weight_2s(const TwoSampleStat& stat, const WeightGenerator& gen) {
  gen.validate();
  if (gen.variant != WeightVariant::BootstrapTwoSample) {
    throw std::invalid_argument("bootstrap_weight_2s: generator is not the two-sample bootstrap variant");
  }
  if (stat.n1 < 1 || stat.n2 < 1) throw std::invalid_argument("TwoSampleStat: group sizes must be >= 1");
  const double inv_n = 1.0 / static_cast<double>(stat.n1) + 1.0 / static_cast<double>(stat.n2);
  const double inv_m = 1.0 / static_cast<double>(gen.resample.at(stat.n1)) +
                       1.0 / static_cast<double>(gen.resample.at(stat.n2));
  const double z = (stat.mean_x - stat.mean_y) / std::sqrt(inv_n);
  const double shrink = std::sqrt(inv_n / inv_m);
  return normal_cdf(normal_quantile(1.0 - gen.lambda) - shrink * z);
}

double weight_limit(int mu_sign, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("weight_limit: lambda must lie in (0, 1)");
  if (mu_sign > 0) return 0.0;
  if (mu_sign < 0) return 1.0;
  return 1.0 - lambda;
}

}  // namespace onlinefwer
