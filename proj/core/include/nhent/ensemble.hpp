#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nhent/evolve.hpp"
#include "nhent/model.hpp"
#include "nhent/types.hpp"

namespace nhent {

struct ObservableFlags {
  bool entropy_half = true;
  bool entropy_profile = false;
  bool density = false;
  bool correlation = false;
  bool mutual_information = false;
};

struct SweepConfig {
  double J = 1.0;
  std::vector<double> gamma_list;
  std::vector<double> W_list;
  std::vector<int> L_list;
  int realizations = 200;
  Schedule schedule;
  std::uint64_t base_seed = 1;
  Boundary boundary = Boundary::Open;
  ObservableFlags observables;
  int profile_stride = 1;  // compute vector profiles every k-th recorded step
  int workers = 1;

  void validate() const;
  std::string canonical_text() const;  // hashed into config_hash
  std::string config_hash() const;
};

// position of a point in the sweep grids; part of the per-realization seed
struct PointKey {
  int gamma_index = 0;
  int w_index = 0;
};

struct ScalarStat {
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct VectorStat {
  VectorR mean;
  VectorR stderr_;
};

struct ObservableRecord {
  double gamma = 0.0;
  double W = 0.0;
  int L = 0;
  Boundary boundary = Boundary::Open;
  Schedule schedule;
  std::uint64_t base_seed = 0;
  PointKey key;
  int realizations_requested = 0;
  int realizations_completed = 0;
  int failures = 0;

  std::optional<ScalarStat> S_half;
  std::optional<ScalarStat> I_AB;
  std::optional<VectorStat> entropy_profile;  // l = 1..L-1
  std::optional<VectorStat> density;          // i = 1..L
  std::optional<VectorStat> correlation;      // l = 1..L/2
};

class PointFailure : public std::runtime_error {
 public:
  PointFailure(const std::string& what, int failed, int total)
      : std::runtime_error(what), failed_count(failed), total_count(total) {}
  int failed_count;
  int total_count;
};

// Disorder-and-time averaging of one grid point. Each realization r draws
// disorder with seed = derive_seed(base_seed, {L, w_index, gamma_index, r}),
// time-averages every requested observable over the recorded steps, and the
// realization-level values are reduced in index order (floating-point sums
// are order-sensitive; a fixed order keeps results worker-count independent).
// Throws PointFailure when more than 1% of realizations abort.
ObservableRecord run_point(const ModelParams& params, int R, const Schedule& schedule,
                           std::uint64_t base_seed, PointKey key = {},
                           const ObservableFlags& flags = {}, int workers = 1,
                           int profile_stride = 1);

std::string point_filename(double gamma, double W, int L);

std::string record_to_json(const ObservableRecord& record, const std::string& config_hash);
ObservableRecord record_from_json(const std::string& json_text);

struct SweepResult {
  std::vector<ObservableRecord> records;
  std::vector<std::string> failed_points;
  std::string config_hash;
};

// Iterates the (gamma, W, L) grid in row-major order (gamma, then W, then L),
// skipping points already complete in the sink when resume is set. Each point
// lands in its own JSON file; manifest.json (config hash + checksummed point
// list) and sweep_results.csv are rewritten at the end.
SweepResult run_sweep(const SweepConfig& config, const std::filesystem::path& sink,
                      bool resume,
                      const std::function<void(const std::string&)>& log = nullptr);

std::string sweep_csv_text(const SweepConfig& config, const std::vector<ObservableRecord>& records);

// generic deterministic work pool: fn(i) for i in [0, n), any worker count
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace nhent
