#pragma once

#include <optional>
#include <span>

#include "onlinefwer/sim.hpp"

namespace onlinefwer {

/// Estimated familywise error rate and power over a set of replications,
/// with Monte Carlo standard errors.
struct MetricsReport {
  double fwer_hat = 0.0;
  double se_fwer = 0.0;
  /// Mean per-replication proportion of rejected false nulls, over the
  /// replications that contain at least one false null; absent when no
  /// replication does.
  std::optional<double> power_hat;
  std::optional<double> se_power;
  std::size_t replications = 0;
};

/// Throws std::invalid_argument on an empty outcome list.
MetricsReport aggregate(std::span<const ReplicationOutcome> outcomes);

}  // namespace onlinefwer
