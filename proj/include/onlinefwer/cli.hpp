#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "onlinefwer/metrics.hpp"
#include "onlinefwer/procedures.hpp"
#include "onlinefwer/sim.hpp"

namespace onlinefwer::cli {

/// Configuration error carrying the offending field path (e.g.
/// "scenario.pi1").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> replications;
  std::optional<std::string> out;
};

/// One sweep point resolved against the base scenario.
struct SweepPoint {
  std::optional<std::uint32_t> hypotheses;   // N
  std::optional<std::uint32_t> sample_size;  // n
  std::optional<double> rho;
  std::optional<double> pi1;
};

struct RunConfig {
  Scenario scenario;  // base scenario, seed already resolved
  std::vector<ProcedureConfig> procedures;
  std::vector<std::string> procedure_ids;
  std::vector<bool> procedure_closed;
  std::vector<SweepPoint> sweep;  // at least one (possibly empty) point
  std::uint32_t replications = 1;
  std::uint64_t seed = 1;
  std::string out = "results.csv";
  unsigned parallelism = 0;
  nlohmann::json resolved;  // fully resolved config, as written to the manifest
};

/// Parses and validates a run configuration. A top-level "config" key (as
/// written to the manifest) is unwrapped so manifests re-run directly.
RunConfig parse_run_config(const nlohmann::json& root, const Overrides& overrides = {});

nlohmann::json load_json_file(const std::string& path);

Scenario scenario_at_point(const Scenario& base, const SweepPoint& point, std::uint64_t point_seed);

/// Renders the result table; one row per (sweep point, procedure).
std::string render_csv(const RunConfig& config);

/// Executes procedures over simulated streams and reports the largest
/// budget partial sum per procedure.
struct AuditRow {
  std::string procedure;
  bool closed = false;
  double alpha = 0.0;
  double max_partial_sum = 0.0;
  bool exceeds = false;
};
std::vector<AuditRow> run_audit(const RunConfig& config);
std::string render_audit_csv(const std::vector<AuditRow>& rows);

/// Thread count from the ONLINEFWER_THREADS environment variable, when set.
std::optional<unsigned> env_thread_count();

/// CLI entry points; return a process exit status (0 ok, 2 config error,
/// 1 runtime error). Diagnostics go to stderr, progress to stdout.
int run_command(const std::string& config_path, const Overrides& overrides);
int audit_command(const std::string& config_path, const Overrides& overrides);

}  // namespace onlinefwer::cli
