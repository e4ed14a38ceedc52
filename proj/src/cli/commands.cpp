#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "onlinefwer/cli.hpp"
#include "onlinefwer/rng.hpp"
#include "onlinefwer/version.hpp"

namespace onlinefwer::cli {

namespace {

// Shortest round-trip decimal representation; locale independent.
std::string fmt(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string fmt(std::optional<double> value) { return value ? fmt(*value) : std::string(); }

struct ScenarioColumns {
  std::string type;
  std::string N, n, pi1, rho, sigma, rate, entry_spacing, effect, lambda;
};

ScenarioColumns columns_for(const Scenario& scenario) {
  ScenarioColumns c;
  if (const auto* a = std::get_if<AutocorrScenario>(&scenario)) {
    c.type = "autocorr";
    c.N = std::to_string(a->hypotheses);
    c.n = std::to_string(a->sample_size);
    c.pi1 = fmt(a->pi1);
    c.rho = fmt(a->rho);
    c.effect = fmt(a->alternative_mean());
    c.lambda = fmt(a->lambda);
  } else {
    const auto& p = std::get<PlatformScenario>(scenario);
    c.type = "platform";
    c.N = std::to_string(p.treatments);
    c.n = std::to_string(p.sample_size);
    c.pi1 = fmt(p.pi1);
    c.sigma = fmt(p.sigma);
    c.rate = fmt(p.rate);
    c.entry_spacing = fmt(p.entry_spacing);
    c.effect = fmt(p.effect);
    c.lambda = fmt(p.lambda);
  }
  return c;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write \"" + path + "\"");
  out << content;
  if (!out) throw std::runtime_error("failed while writing \"" + path + "\"");
}

}  // namespace

std::optional<unsigned> env_thread_count() {
  const char* raw = std::getenv("ONLINEFWER_THREADS");
  if (!raw || !*raw) return std::nullopt;
  unsigned value = 0;
  const auto res = std::from_chars(raw, raw + std::char_traits<char>::length(raw), value);
  if (res.ec != std::errc() || *res.ptr != '\0') return std::nullopt;
  return value;
}

std::string render_csv(const RunConfig& config) {
  std::string csv =
      "scenario,N,n,pi1,rho,sigma,rate,entry_spacing,effect,lambda,"
      "procedure,closed,fwer_hat,se_fwer,power_hat,se_power,replications,seed\n";

  StudyOptions options;
  options.replications = config.replications;
  options.parallelism = config.parallelism;

  for (std::size_t point = 0; point < config.sweep.size(); ++point) {
    const Scenario scenario =
        scenario_at_point(config.scenario, config.sweep[point], derive_stream_key(config.seed, point));
    const auto outcomes = run_study(scenario, config.procedures, options);
    const ScenarioColumns cols = columns_for(scenario);
    for (std::size_t p = 0; p < config.procedures.size(); ++p) {
      const MetricsReport report = aggregate(outcomes[p]);
      csv += cols.type + ',' + cols.N + ',' + cols.n + ',' + cols.pi1 + ',' + cols.rho + ',' + cols.sigma +
             ',' + cols.rate + ',' + cols.entry_spacing + ',' + cols.effect + ',' + cols.lambda + ',' +
             config.procedure_ids[p] + ',' + (config.procedure_closed[p] ? "1" : "0") + ',' +
             fmt(report.fwer_hat) + ',' + fmt(report.se_fwer) + ',' + fmt(report.power_hat) + ',' +
             fmt(report.se_power) + ',' + std::to_string(report.replications) + ',' +
             std::to_string(config.seed) + '\n';
    }
  }
  return csv;
}

std::vector<AuditRow> run_audit(const RunConfig& config) {
  const Scenario scenario =
      scenario_at_point(config.scenario, config.sweep.front(), derive_stream_key(config.seed, 0));
  const std::uint64_t seed = std::visit([](const auto& s) { return s.seed; }, scenario);

  std::vector<AuditRow> rows(config.procedures.size());
  for (std::size_t p = 0; p < rows.size(); ++p) {
    rows[p].procedure = config.procedure_ids[p];
    rows[p].closed = config.procedure_closed[p];
    rows[p].alpha = config.procedures[p].alpha;
  }

  std::vector<double> levels, weights, lambdas;
  for (std::uint32_t rep = 0; rep < config.replications; ++rep) {
    CounterRng rng(seed, rep);
    const StreamData data = std::visit(
        [&rng](const auto& s) {
          if constexpr (std::is_same_v<std::decay_t<decltype(s)>, AutocorrScenario>) {
            return simulate_autocorr_stream(s, rng);
          } else {
            return simulate_platform_stream(s, rng);
          }
        },
        scenario);

    for (std::size_t p = 0; p < config.procedures.size(); ++p) {
      const ProcedureConfig& cfg = config.procedures[p];
      Session session = make_session(cfg);
      for (std::size_t i = 0; i < data.p.size(); ++i) {
        session.next_level();
        session.report(PValueRecord{data.p[i], data.weight[i], data.sample_size});
      }
      const auto& history = session.state().history;
      levels.clear();
      weights.clear();
      lambdas.clear();
      for (std::size_t i = 0; i < history.size(); ++i) {
        levels.push_back(history[i].level);
        // Alpha-spending and the fallback are audited at xi = 1, lambda = 0;
        // the adaptive rule at its non-candidate indicator; the weighted
        // rules at their consistent weights.
        if (cfg.kind == ProcedureKind::AlphaSpending || cfg.kind == ProcedureKind::OnlineFallback) {
          weights.push_back(1.0);
          lambdas.push_back(0.0);
        } else {
          weights.push_back(history[i].weight);
          lambdas.push_back(cfg.lambda.at(i + 1));
        }
      }
      const double max_sum = audit_budget(levels, weights, lambdas);
      rows[p].max_partial_sum = std::max(rows[p].max_partial_sum, max_sum);
    }
  }

  for (AuditRow& row : rows) row.exceeds = row.max_partial_sum > row.alpha + 1e-9;
  return rows;
}

std::string render_audit_csv(const std::vector<AuditRow>& rows) {
  std::string csv = "procedure,closed,alpha,max_partial_sum,exceeds\n";
  for (const AuditRow& row : rows) {
    csv += row.procedure + ',' + (row.closed ? "1" : "0") + ',' + fmt(row.alpha) + ',' +
           fmt(row.max_partial_sum) + ',' + (row.exceeds ? "1" : "0") + '\n';
  }
  return csv;
}

namespace {

RunConfig load_run_config(const std::string& config_path, const Overrides& overrides) {
  RunConfig config = parse_run_config(load_json_file(config_path), overrides);
  if (const auto threads = env_thread_count()) config.parallelism = *threads;
  return config;
}

nlohmann::json manifest_for(const RunConfig& config) {
  return nlohmann::json{{"tool", "onlinefwer"}, {"version", kVersion}, {"config", config.resolved}};
}

}  // namespace

int run_command(const std::string& config_path, const Overrides& overrides) {
  try {
    const RunConfig config = load_run_config(config_path, overrides);
    const std::string csv = render_csv(config);
    write_file(config.out, csv);
    write_file(config.out + ".manifest.json", manifest_for(config).dump(2) + "\n");
    std::cout << "wrote " << config.out << " (" << config.sweep.size() * config.procedures.size()
              << " rows) and " << config.out << ".manifest.json\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int audit_command(const std::string& config_path, const Overrides& overrides) {
  try {
    const RunConfig config = load_run_config(config_path, overrides);
    const std::vector<AuditRow> rows = run_audit(config);
    const std::string csv = render_audit_csv(rows);
    write_file(config.out, csv);
    for (const AuditRow& row : rows) {
      std::cout << row.procedure << (row.closed ? " (closed)" : "") << ": max partial sum "
                << fmt(row.max_partial_sum) << " vs alpha " << fmt(row.alpha)
                << (row.exceeds ? "  [exceeds]" : "") << "\n";
    }
    std::cout << "wrote " << config.out << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace onlinefwer::cli
