#include "onlinefwer/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace onlinefwer {

MetricsReport aggregate(std::span<const ReplicationOutcome> outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("aggregate: no outcomes");

  MetricsReport report;
  report.replications = outcomes.size();

  std::size_t false_rejection_runs = 0;
  std::size_t power_runs = 0;
  double power_sum = 0.0;
  double power_sq_sum = 0.0;
  for (const ReplicationOutcome& outcome : outcomes) {
    if (outcome.any_false_rejection) ++false_rejection_runs;
    if (outcome.false_nulls > 0) {
      ++power_runs;
      const double prop = static_cast<double>(outcome.true_rejections) / outcome.false_nulls;
      power_sum += prop;
      power_sq_sum += prop * prop;
    }
  }

  const auto r = static_cast<double>(outcomes.size());
  report.fwer_hat = static_cast<double>(false_rejection_runs) / r;
  report.se_fwer = std::sqrt(report.fwer_hat * (1.0 - report.fwer_hat) / r);

  if (power_runs > 0) {
    const auto rp = static_cast<double>(power_runs);
    const double mean = power_sum / rp;
    report.power_hat = mean;
    if (power_runs > 1) {
      const double var = (power_sq_sum - rp * mean * mean) / (rp - 1.0);
      report.se_power = std::sqrt(std::max(var, 0.0) / rp);
    }
  }
  return report;
}

}  // namespace onlinefwer
