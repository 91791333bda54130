#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nhent/collapse.hpp"
#include "nhent/ensemble.hpp"
#include "nhent/evolve.hpp"
#include "nhent/model.hpp"

namespace nhent {

enum class Command { Simulate, Sweep, Collapse, Spectral, OracleCheck };

std::string to_string(Command c);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpectralSection {
  std::vector<double> W_list;
  int realizations = 50;
  int bins = 101;
  std::int64_t n_sites = 100000;
  bool asymptotic = true;
};

struct CollapseSection {
  std::string input;  // CSV path (sweep_results.csv schema)
  std::optional<double> init_Wc;  // default: peak of S(W) at the largest L
  double init_nu = 2.0;
  double init_beta = 0.5;
  CollapseOptions options;
};

// Fully resolved run configuration. parse_config rejects unknown and
// duplicate keys and reports the offending line.
struct RunConfig {
  std::optional<Command> command;
  std::string output_dir = "nhent_out";
  std::uint64_t base_seed = 1;
  int workers = 0;  // 0 = pick at dispatch time (flag > NHENT_WORKERS > hardware)
  bool resume = false;

  double J = 1.0;
  double gamma = -0.5;
  double W = 0.0;
  int L = 64;
  Boundary boundary = Boundary::Open;

  Schedule schedule;

  std::vector<double> gamma_list;  // sweep grids; default {model.gamma}
  std::vector<double> W_list;
  std::vector<int> L_list;         // default {model.L}
  int realizations = 200;
  std::optional<ObservableFlags> observables;  // command-dependent default
  int profile_stride = 1;

  SpectralSection spectral;
  CollapseSection collapse;

  // canonical key=value echo with all defaults materialized; parses back
  // to an identical config
  std::string resolved_text() const;
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(std::string_view text, const std::string& origin);

// Runs the configured command; writes outputs (plus resolved config,
// version stamp and manifest) under config.output_dir. Returns the process
// exit status.
int dispatch(const RunConfig& config);

}  // namespace nhent
