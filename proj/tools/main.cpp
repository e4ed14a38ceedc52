#include <string>

#include <CLI11.hpp>

#include "onlinefwer/cli.hpp"
#include "onlinefwer/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"onlinefwer: online multiple testing simulation harness"};
  app.set_version_flag("--version", std::string(onlinefwer::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  onlinefwer::cli::Overrides overrides;
  std::uint64_t seed = 0;
  std::uint32_t replications = 0;
  std::string out;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "JSON configuration (or manifest) file")->required();
    cmd->add_option("--seed", seed, "override the configured seed");
    cmd->add_option("--replications", replications, "override the configured replication count");
    cmd->add_option("--out", out, "override the configured output path");
  };

  CLI::App* run = app.add_subcommand("run", "run the configured studies and write CSV results");
  add_common(run);
  CLI::App* audit = app.add_subcommand("audit", "report max budget partial sums along simulated streams");
  add_common(audit);

  CLI11_PARSE(app, argc, argv);

  CLI::App* active = run->parsed() ? run : audit;
  if (active->count("--seed")) overrides.seed = seed;
  if (active->count("--replications")) overrides.replications = replications;
  if (active->count("--out")) overrides.out = out;

  return run->parsed() ? onlinefwer::cli::run_command(config_path, overrides)
                       : onlinefwer::cli::audit_command(config_path, overrides);
}
