#include "nhent/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "nhent/io.hpp"
#include "nhent/observables.hpp"
#include "nhent/rng.hpp"
#include "nhent/version.hpp"

namespace nhent {

using nlohmann::json;

void SweepConfig::validate() const {
  // an empty grid is legal and sweeps to an empty dataset
  if (realizations < 1) throw std::invalid_argument("sweep.realizations must be >= 1");
  if (profile_stride < 1) throw std::invalid_argument("sweep.profile_stride must be >= 1");
  schedule.validate();
  for (int L : L_list) {
    ModelParams p;
    p.L = L;
    p.validate();
  }
  for (double W : W_list)
    if (W < 0.0) throw std::invalid_argument("sweep W values must be >= 0");
}

std::string SweepConfig::canonical_text() const {
  std::ostringstream ss;
  ss << "J=" << format_g17(J) << "\nboundary=" << to_string(boundary) << "\ngamma=";
  for (double g : gamma_list) ss << format_g17(g) << ",";
  ss << "\nW=";
  for (double w : W_list) ss << format_g17(w) << ",";
  ss << "\nL=";
  for (int l : L_list) ss << l << ",";
  ss << "\nR=" << realizations << "\nseed=" << base_seed << "\ndt=" << format_g17(schedule.dt)
     << "\nn_steps=" << schedule.n_steps << "\nrecord_last=" << schedule.record_last
     << "\nhealth_stride=" << schedule.health_stride << "\nobs=" << observables.entropy_half
     << observables.entropy_profile << observables.density << observables.correlation
     << observables.mutual_information << "\nprofile_stride=" << profile_stride << "\n";
  return ss.str();
}

std::string SweepConfig::config_hash() const { return fnv1a64_hex(canonical_text()); }

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto body = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min(workers, n);
  pool.reserve(count);
  for (int w = 0; w < count; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

struct RealizationValues {
  bool failed = false;
  std::string error;
  double S_half = 0.0;
  double I_AB = 0.0;
  VectorR profile, density, correlation;
};

ScalarStat reduce_scalar(const std::vector<double>& v) {
  ScalarStat s;
  const size_t n = v.size();
  for (double x : v) s.mean += x;
  s.mean /= n;
  if (n > 1) {
    double var = 0.0;
    for (double x : v) var += (x - s.mean) * (x - s.mean);
    var /= (n - 1);
    s.stderr_ = std::sqrt(var / n);
  }
  return s;
}

VectorStat reduce_vector(const std::vector<const VectorR*>& v) {
  VectorStat s;
  const size_t n = v.size();
  const Eigen::Index dim = v.front()->size();
  s.mean = VectorR::Zero(dim);
  s.stderr_ = VectorR::Zero(dim);
  for (const VectorR* x : v) s.mean += *x;
  s.mean /= static_cast<double>(n);
  if (n > 1) {
    for (const VectorR* x : v) s.stderr_ += (*x - s.mean).cwiseAbs2();
    s.stderr_ = (s.stderr_ / double(n - 1) / double(n)).cwiseSqrt();
  }
  return s;
}

}  // namespace

ObservableRecord run_point(const ModelParams& params, int R, const Schedule& schedule,
                           std::uint64_t base_seed, PointKey key, const ObservableFlags& flags,
                           int workers, int profile_stride) {
  params.validate();
  schedule.validate();
  if (R < 1) throw std::invalid_argument("run_point needs R >= 1");

  const int L = params.L;
  const Subsystem half = Subsystem::range(1, L / 2);
  const Subsystem quarter_a = left_quarter(L);
  const Subsystem quarter_b = right_quarter(L);

  std::vector<RealizationValues> vals(R);
  parallel_for(R, workers, [&](int r) {
    RealizationValues& out = vals[r];
    try {
      const std::uint64_t seed = derive_seed(
          base_seed, {static_cast<std::uint64_t>(L), static_cast<std::uint64_t>(key.w_index),
                      static_cast<std::uint64_t>(key.gamma_index), static_cast<std::uint64_t>(r)});
      const DisorderRealization dis = sample_disorder(params, seed);
      if (flags.entropy_profile) out.profile = VectorR::Zero(L - 1);
      if (flags.density) out.density = VectorR::Zero(L);
      if (flags.correlation) out.correlation = VectorR::Zero(L / 2);
      int recorded = 0, profiles = 0;
      evolve_trajectory(params, dis, schedule, [&](int, const CorrelationMatrix& c) {
        if (flags.entropy_half) out.S_half += entanglement_entropy(c, half);
        if (flags.mutual_information) out.I_AB += mutual_information(c, quarter_a, quarter_b);
        if (flags.density) out.density += density_profile(c);
        if (flags.correlation)
          for (int l = 1; l <= L / 2; ++l) out.correlation[l - 1] += connected_correlation(c, l);
        if (flags.entropy_profile && recorded % profile_stride == 0) {
          out.profile += entropy_profile(c);
          ++profiles;
        }
        ++recorded;
      });
      out.S_half /= recorded;
      out.I_AB /= recorded;
      if (flags.density) out.density /= recorded;
      if (flags.correlation) out.correlation /= recorded;
      if (flags.entropy_profile) out.profile /= profiles;
    } catch (const StabilizationError& e) {
      out.failed = true;
      out.error = e.what();
    }
  });

  ObservableRecord rec;
  rec.gamma = params.gamma;
  rec.W = params.W;
  rec.L = L;
  rec.boundary = params.boundary;
  rec.schedule = schedule;
  rec.base_seed = base_seed;
  rec.key = key;
  rec.realizations_requested = R;
  for (const auto& v : vals)
    if (v.failed) ++rec.failures;
  rec.realizations_completed = R - rec.failures;

  if (rec.failures > 0.01 * R) {
    std::string first;
    for (const auto& v : vals)
      if (v.failed) {
        first = v.error;
        break;
      }
    throw PointFailure("point failed: " + std::to_string(rec.failures) + "/" +
                           std::to_string(R) + " realizations aborted (" + first + ")",
                       rec.failures, R);
  }

  std::vector<double> s_half, i_ab;
  std::vector<const VectorR*> prof, dens, corr;
  for (const auto& v : vals) {
    if (v.failed) continue;
    s_half.push_back(v.S_half);
    i_ab.push_back(v.I_AB);
    if (flags.entropy_profile) prof.push_back(&v.profile);
    if (flags.density) dens.push_back(&v.density);
    if (flags.correlation) corr.push_back(&v.correlation);
  }
  if (flags.entropy_half) rec.S_half = reduce_scalar(s_half);
  if (flags.mutual_information) rec.I_AB = reduce_scalar(i_ab);
  if (flags.entropy_profile) rec.entropy_profile = reduce_vector(prof);
  if (flags.density) rec.density = reduce_vector(dens);
  if (flags.correlation) rec.correlation = reduce_vector(corr);
  return rec;
}

std::string point_filename(double gamma, double W, int L) {
  return "g" + format_g(gamma) + "_W" + format_g(W) + "_L" + std::to_string(L) + ".json";
}

namespace {

json stat_to_json(const ScalarStat& s) {
  return json{{"mean", s.mean}, {"stderr", s.stderr_}};
}

json stat_to_json(const VectorStat& s) {
  std::vector<double> mean(s.mean.begin(), s.mean.end());
  std::vector<double> err(s.stderr_.begin(), s.stderr_.end());
  return json{{"mean", mean}, {"stderr", err}};
}

ScalarStat scalar_from_json(const json& j) {
  return ScalarStat{j.at("mean").get<double>(), j.at("stderr").get<double>()};
}

VectorStat vector_from_json(const json& j) {
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto err = j.at("stderr").get<std::vector<double>>();
  VectorStat s;
  s.mean = Eigen::Map<const VectorR>(mean.data(), mean.size());
  s.stderr_ = Eigen::Map<const VectorR>(err.data(), err.size());
  return s;
}

}  // namespace

std::string record_to_json(const ObservableRecord& rec, const std::string& config_hash) {
  json j;
  j["point"] = {{"gamma", rec.gamma}, {"W", rec.W}, {"L", rec.L}};
  j["boundary"] = to_string(rec.boundary);
  j["schedule"] = {{"dt", rec.schedule.dt},
                   {"n_steps", rec.schedule.n_steps},
                   {"record_last", rec.schedule.record_last}};
  j["seed"] = {{"base", rec.base_seed},
               {"gamma_index", rec.key.gamma_index},
               {"w_index", rec.key.w_index}};
  j["realizations"] = {{"requested", rec.realizations_requested},
                       {"completed", rec.realizations_completed},
                       {"failed", rec.failures}};
  j["config_hash"] = config_hash;
  json obs;
  if (rec.S_half) obs["S_half"] = stat_to_json(*rec.S_half);
  if (rec.I_AB) obs["mutual_information"] = stat_to_json(*rec.I_AB);
  if (rec.entropy_profile) obs["entropy_profile"] = stat_to_json(*rec.entropy_profile);
  if (rec.density) obs["density"] = stat_to_json(*rec.density);
  if (rec.correlation) obs["correlation"] = stat_to_json(*rec.correlation);
  j["observables"] = obs;
  return j.dump(2) + "\n";
}

ObservableRecord record_from_json(const std::string& text) {
  const json j = json::parse(text);
  ObservableRecord rec;
  rec.gamma = j.at("point").at("gamma").get<double>();
  rec.W = j.at("point").at("W").get<double>();
  rec.L = j.at("point").at("L").get<int>();
  rec.boundary =
      j.at("boundary").get<std::string>() == "open" ? Boundary::Open : Boundary::Periodic;
  rec.schedule.dt = j.at("schedule").at("dt").get<double>();
  rec.schedule.n_steps = j.at("schedule").at("n_steps").get<int>();
  rec.schedule.record_last = j.at("schedule").at("record_last").get<int>();
  rec.base_seed = j.at("seed").at("base").get<std::uint64_t>();
  rec.key.gamma_index = j.at("seed").at("gamma_index").get<int>();
  rec.key.w_index = j.at("seed").at("w_index").get<int>();
  rec.realizations_requested = j.at("realizations").at("requested").get<int>();
  rec.realizations_completed = j.at("realizations").at("completed").get<int>();
  rec.failures = j.at("realizations").at("failed").get<int>();
  const json& obs = j.at("observables");
  if (obs.contains("S_half")) rec.S_half = scalar_from_json(obs.at("S_half"));
  if (obs.contains("mutual_information")) rec.I_AB = scalar_from_json(obs.at("mutual_information"));
  if (obs.contains("entropy_profile"))
    rec.entropy_profile = vector_from_json(obs.at("entropy_profile"));
  if (obs.contains("density")) rec.density = vector_from_json(obs.at("density"));
  if (obs.contains("correlation")) rec.correlation = vector_from_json(obs.at("correlation"));
  return rec;
}

std::string sweep_csv_text(const SweepConfig& config, const std::vector<ObservableRecord>& recs) {
  std::ostringstream csv;
  csv << "gamma,W,L,realizations,S_half,S_half_err";
  if (config.observables.mutual_information) csv << ",I_AB,I_AB_err";
  csv << "\n";
  for (const auto& r : recs) {
    csv << format_g17(r.gamma) << "," << format_g17(r.W) << "," << r.L << ","
        << r.realizations_completed;
    csv << "," << (r.S_half ? format_g17(r.S_half->mean) : "nan") << ","
        << (r.S_half ? format_g17(r.S_half->stderr_) : "nan");
    if (config.observables.mutual_information)
      csv << "," << (r.I_AB ? format_g17(r.I_AB->mean) : "nan") << ","
          << (r.I_AB ? format_g17(r.I_AB->stderr_) : "nan");
    csv << "\n";
  }
  return csv.str();
}

SweepResult run_sweep(const SweepConfig& config, const std::filesystem::path& sink, bool resume,
                      const std::function<void(const std::string&)>& log) {
  namespace fs = std::filesystem;
  config.validate();
  fs::create_directories(sink);
  const std::string hash = config.config_hash();

  SweepResult result;
  result.config_hash = hash;
  json manifest_points = json::array();

  auto note = [&log](const std::string& msg) {
    if (log) log(msg);
  };

  for (size_t ig = 0; ig < config.gamma_list.size(); ++ig) {
    for (size_t iw = 0; iw < config.W_list.size(); ++iw) {
      for (size_t il = 0; il < config.L_list.size(); ++il) {
        ModelParams params;
        params.J = config.J;
        params.gamma = config.gamma_list[ig];
        params.W = config.W_list[iw];
        params.L = config.L_list[il];
        params.boundary = config.boundary;

        const std::string name = point_filename(params.gamma, params.W, params.L);
        const fs::path path = sink / name;
        json entry{{"gamma", params.gamma}, {"W", params.W}, {"L", params.L}, {"file", name}};

        bool reused = false;
        if (resume && fs::exists(path)) {
          try {
            const std::string text = read_text(path);
            const json j = json::parse(text);
            if (j.at("config_hash").get<std::string>() == hash) {
              result.records.push_back(record_from_json(text));
              entry["checksum"] = fnv1a64_hex(text);
              entry["status"] = "complete";
              reused = true;
              note("reused " + name);
            }
          } catch (const std::exception&) {
            // unreadable or stale; recompute below
          }
        }
        if (!reused) {
          try {
            const ObservableRecord rec = run_point(
                params, config.realizations, config.schedule, config.base_seed,
                PointKey{static_cast<int>(ig), static_cast<int>(iw)}, config.observables,
                config.workers, config.profile_stride);
            const std::string text = record_to_json(rec, hash);
            write_text_atomic(path, text);
            result.records.push_back(rec);
            entry["checksum"] = fnv1a64_hex(text);
            entry["status"] = "complete";
            note("computed " + name);
          } catch (const PointFailure& e) {
            result.failed_points.push_back(name);
            entry["status"] = "failed";
            entry["error"] = std::string(e.what());
            note("FAILED " + name + ": " + e.what());
          }
        }
        manifest_points.push_back(entry);
      }
    }
  }

  json manifest;
  manifest["command"] = "sweep";
  manifest["version"] = kVersion;
  manifest["config_hash"] = hash;
  manifest["points"] = manifest_points;
  write_text_atomic(sink / "manifest.json", manifest.dump(2) + "\n");
  write_text_atomic(sink / "sweep_results.csv", sweep_csv_text(config, result.records));
  return result;
}

}  // namespace nhent
