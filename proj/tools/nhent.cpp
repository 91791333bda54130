// nhent: disordered Hatano-Nelson entanglement dynamics.
//
// Subcommands: simulate, sweep, collapse, spectral, oracle-check.
// Every run writes a resolved config, a version-stamped manifest and
// deterministic CSV/JSON outputs into --output (or the config's output_dir).

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "nhent/cli.hpp"
#include "nhent/version.hpp"

namespace {

int resolve_workers(const std::optional<int>& flag, const nhent::RunConfig& config) {
  if (flag && *flag > 0) return *flag;
  if (const char* env = std::getenv("NHENT_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  if (config.workers > 0) return config.workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"disordered Hatano-Nelson entanglement dynamics"};
  app.set_version_flag("--version", nhent::kVersion);
  app.require_subcommand(1);

  struct {
    std::string config_path;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    bool resume = false;
  } args;

  auto add_common = [&args](CLI::App* cmd, bool config_required) {
    auto* opt = cmd->add_option("--config", args.config_path, "key = value configuration file");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--output", args.output_dir, "output directory (overrides output_dir)");
    cmd->add_option("--seed", args.seed, "base seed (overrides base_seed)");
    cmd->add_option("--workers", args.workers, "worker threads (NHENT_WORKERS is the fallback)");
    cmd->add_flag("--resume", args.resume, "skip grid points already complete in the output");
  };

  using nhent::Command;
  std::vector<std::pair<CLI::App*, Command>> cmds = {
      {app.add_subcommand("simulate", "single (gamma, W, L) point with full profiles"),
       Command::Simulate},
      {app.add_subcommand("sweep", "disorder-averaged (gamma, W, L) grid"), Command::Sweep},
      {app.add_subcommand("collapse", "finite-size-scaling fit of a sweep CSV"),
       Command::Collapse},
      {app.add_subcommand("spectral", "orthogonality index / MIPR / localization diagnostics"),
       Command::Spectral},
      {app.add_subcommand("oracle-check", "reference-vs-engine validation suite"),
       Command::OracleCheck},
  };
  for (auto& [cmd, kind] : cmds) add_common(cmd, kind != Command::OracleCheck);

  CLI11_PARSE(app, argc, argv);

  try {
    nhent::RunConfig config;
    if (!args.config_path.empty()) config = nhent::parse_config_file(args.config_path);

    Command requested = Command::OracleCheck;
    for (auto& [cmd, kind] : cmds)
      if (cmd->parsed()) requested = kind;
    if (config.command && *config.command != requested)
      throw nhent::ConfigError("config names command '" + nhent::to_string(*config.command) +
                               "' but '" + nhent::to_string(requested) + "' was invoked");
    config.command = requested;

    if (!args.output_dir.empty()) config.output_dir = args.output_dir;
    if (args.seed) config.base_seed = *args.seed;
    if (args.resume) config.resume = true;
    config.workers = resolve_workers(args.workers, config);

    return nhent::dispatch(config);
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", e.what()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 2;
  }
}
