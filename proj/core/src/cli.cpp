#include "nhent/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include <json.hpp>

#include "nhent/io.hpp"
#include "nhent/observables.hpp"
#include "nhent/reference.hpp"
#include "nhent/rng.hpp"
#include "nhent/spectral.hpp"
#include "nhent/version.hpp"

namespace nhent {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Sweep: return "sweep";
    case Command::Collapse: return "collapse";
    case Command::Spectral: return "spectral";
    case Command::OracleCheck: return "oracle-check";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// key = value parsing
// ---------------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text, const std::string& origin) {
    KeyValueFile kv;
    kv.origin_ = origin;
    int lineno = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
      const size_t nl = text.find('\n', pos);
      std::string line(text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                     : nl - pos));
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      const size_t eq = t.find('=');
      if (eq == std::string::npos) fail(origin, lineno, "expected 'key = value': '" + t + "'");
      const std::string key = trim(t.substr(0, eq));
      const std::string value = trim(t.substr(eq + 1));
      if (key.empty()) fail(origin, lineno, "empty key");
      if (kv.entries_.count(key))
        fail(origin, lineno,
             "duplicate key '" + key + "' (first set on line " +
                 std::to_string(kv.entries_[key].line) + ")");
      kv.entries_[key] = {value, lineno};
    }
    return kv;
  }

  bool take(const std::string& key, std::string& value, int& line) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return false;
    value = it->second.value;
    line = it->second.line;
    entries_.erase(it);
    return true;
  }

  // any keys left over are unknown
  void finish() const {
    if (entries_.empty()) return;
    const auto& [key, e] = *entries_.begin();
    fail(origin_, e.line, "unknown key '" + key + "'");
  }

  const std::string& origin() const { return origin_; }

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, Entry> entries_;
  std::string origin_;
};

double to_double(const std::string& origin, int line, const std::string& key,
                 const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end)
    fail(origin, line, "key '" + key + "': expected a number, got '" + s + "'");
  return v;
}

long long to_int(const std::string& origin, int line, const std::string& key,
                 const std::string& s) {
  long long v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end)
    fail(origin, line, "key '" + key + "': expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& origin, int line, const std::string& key,
                     const std::string& s) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end)
    fail(origin, line, "key '" + key + "': expected an unsigned integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& origin, int line, const std::string& key, const std::string& s) {
  if (s == "true" || s == "on" || s == "1") return true;
  if (s == "false" || s == "off" || s == "0") return false;
  fail(origin, line, "key '" + key + "': expected true/false, got '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

// comma list; an a:b:step element expands to an inclusive grid
std::vector<double> to_double_list(const std::string& origin, int line, const std::string& key,
                                   const std::string& s) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (const std::string& item : split(s, ',')) {
    if (item.find(':') == std::string::npos) {
      out.push_back(to_double(origin, line, key, item));
      continue;
    }
    const auto parts = split(item, ':');
    if (parts.size() != 3)
      fail(origin, line, "key '" + key + "': range must be start:stop:step, got '" + item + "'");
    const double a = to_double(origin, line, key, parts[0]);
    const double b = to_double(origin, line, key, parts[1]);
    const double st = to_double(origin, line, key, parts[2]);
    if (!(st > 0.0) || b < a)
      fail(origin, line, "key '" + key + "': bad range '" + item + "'");
    const long long n = std::llround((b - a) / st);
    if (std::abs(a + n * st - b) > 1e-9 * std::max(1.0, std::abs(st)))
      fail(origin, line, "key '" + key + "': step does not divide range '" + item + "'");
    for (long long k = 0; k <= n; ++k) out.push_back(a + k * st);
  }
  return out;
}

std::vector<int> to_int_list(const std::string& origin, int line, const std::string& key,
                             const std::string& s) {
  std::vector<int> out;
  if (trim(s).empty()) return out;
  for (const std::string& item : split(s, ','))
    out.push_back(static_cast<int>(to_int(origin, line, key, item)));
  return out;
}

ObservableFlags to_flags(const std::string& origin, int line, const std::string& key,
                         const std::string& s) {
  ObservableFlags f;
  f.entropy_half = false;
  for (const std::string& item : split(s, ',')) {
    if (item == "entropy_half") f.entropy_half = true;
    else if (item == "entropy_profile") f.entropy_profile = true;
    else if (item == "density") f.density = true;
    else if (item == "correlation") f.correlation = true;
    else if (item == "mutual_information") f.mutual_information = true;
    else if (item == "all")
      f = ObservableFlags{true, true, true, true, true};
    else
      fail(origin, line, "key '" + key + "': unknown observable '" + item + "'");
  }
  return f;
}

std::string flags_to_string(const ObservableFlags& f) {
  std::vector<std::string> names;
  if (f.entropy_half) names.push_back("entropy_half");
  if (f.entropy_profile) names.push_back("entropy_profile");
  if (f.density) names.push_back("density");
  if (f.correlation) names.push_back("correlation");
  if (f.mutual_information) names.push_back("mutual_information");
  std::string out;
  for (size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + names[i];
  return out;
}

}  // namespace

RunConfig parse_config_text(std::string_view text, const std::string& origin) {
  KeyValueFile kv = KeyValueFile::parse(text, origin);
  RunConfig c;
  std::string v;
  int line = 0;

  if (kv.take("command", v, line)) {
    if (v == "simulate") c.command = Command::Simulate;
    else if (v == "sweep") c.command = Command::Sweep;
    else if (v == "collapse") c.command = Command::Collapse;
    else if (v == "spectral") c.command = Command::Spectral;
    else if (v == "oracle-check") c.command = Command::OracleCheck;
    else fail(origin, line, "unknown command '" + v + "'");
  }
  if (kv.take("output_dir", v, line)) c.output_dir = v;
  if (kv.take("base_seed", v, line)) c.base_seed = to_u64(origin, line, "base_seed", v);
  if (kv.take("workers", v, line)) {
    c.workers = static_cast<int>(to_int(origin, line, "workers", v));
    if (c.workers < 0) fail(origin, line, "workers must be >= 0");
  }
  if (kv.take("resume", v, line)) c.resume = to_bool(origin, line, "resume", v);
  if (kv.take("boundary", v, line)) {
    if (v == "open") c.boundary = Boundary::Open;
    else if (v == "periodic") c.boundary = Boundary::Periodic;
    else fail(origin, line, "boundary must be open or periodic, got '" + v + "'");
  }

  if (kv.take("model.J", v, line)) c.J = to_double(origin, line, "model.J", v);
  if (kv.take("model.gamma", v, line)) c.gamma = to_double(origin, line, "model.gamma", v);
  if (kv.take("model.W", v, line)) {
    c.W = to_double(origin, line, "model.W", v);
    if (c.W < 0.0) fail(origin, line, "model.W must be >= 0");
  }
  if (kv.take("model.L", v, line)) {
    c.L = static_cast<int>(to_int(origin, line, "model.L", v));
    if (c.L < 4 || c.L % 2 != 0) fail(origin, line, "model.L must be even and >= 4");
  }

  if (kv.take("schedule.dt", v, line)) {
    c.schedule.dt = to_double(origin, line, "schedule.dt", v);
    if (!(c.schedule.dt > 0.0)) fail(origin, line, "schedule.dt must be > 0");
  }
  if (kv.take("schedule.n_steps", v, line))
    c.schedule.n_steps = static_cast<int>(to_int(origin, line, "schedule.n_steps", v));
  if (kv.take("schedule.record_last", v, line))
    c.schedule.record_last = static_cast<int>(to_int(origin, line, "schedule.record_last", v));
  if (kv.take("schedule.health_stride", v, line))
    c.schedule.health_stride = static_cast<int>(to_int(origin, line, "schedule.health_stride", v));
  if (c.schedule.record_last < 1 || c.schedule.n_steps < c.schedule.record_last)
    throw ConfigError(origin + ": schedule requires n_steps >= record_last >= 1");

  if (kv.take("sweep.gamma_list", v, line))
    c.gamma_list = to_double_list(origin, line, "sweep.gamma_list", v);
  if (kv.take("sweep.W_list", v, line)) {
    c.W_list = to_double_list(origin, line, "sweep.W_list", v);
    for (double w : c.W_list)
      if (w < 0.0) fail(origin, line, "sweep.W_list values must be >= 0");
  }
  if (kv.take("sweep.L_list", v, line)) {
    c.L_list = to_int_list(origin, line, "sweep.L_list", v);
    for (int l : c.L_list)
      if (l < 4 || l % 2 != 0) fail(origin, line, "sweep.L_list entries must be even and >= 4");
  }
  if (kv.take("sweep.realizations", v, line)) {
    c.realizations = static_cast<int>(to_int(origin, line, "sweep.realizations", v));
    if (c.realizations < 1) fail(origin, line, "sweep.realizations must be >= 1");
  }
  if (kv.take("sweep.observables", v, line)) {
    if (v != "default") c.observables = to_flags(origin, line, "sweep.observables", v);
  }
  if (kv.take("sweep.profile_stride", v, line)) {
    c.profile_stride = static_cast<int>(to_int(origin, line, "sweep.profile_stride", v));
    if (c.profile_stride < 1) fail(origin, line, "sweep.profile_stride must be >= 1");
  }

  if (kv.take("spectral.W_list", v, line))
    c.spectral.W_list = to_double_list(origin, line, "spectral.W_list", v);
  if (kv.take("spectral.realizations", v, line)) {
    c.spectral.realizations = static_cast<int>(to_int(origin, line, "spectral.realizations", v));
    if (c.spectral.realizations < 1) fail(origin, line, "spectral.realizations must be >= 1");
  }
  if (kv.take("spectral.bins", v, line)) {
    c.spectral.bins = static_cast<int>(to_int(origin, line, "spectral.bins", v));
    if (c.spectral.bins < 1) fail(origin, line, "spectral.bins must be >= 1");
  }
  if (kv.take("spectral.n_sites", v, line)) {
    c.spectral.n_sites = to_int(origin, line, "spectral.n_sites", v);
    if (c.spectral.n_sites < 1000) fail(origin, line, "spectral.n_sites must be >= 1000");
  }
  if (kv.take("spectral.asymptotic", v, line))
    c.spectral.asymptotic = to_bool(origin, line, "spectral.asymptotic", v);

  if (kv.take("collapse.input", v, line)) c.collapse.input = v;
  if (kv.take("collapse.init_Wc", v, line)) {
    if (v != "auto") c.collapse.init_Wc = to_double(origin, line, "collapse.init_Wc", v);
  }
  if (kv.take("collapse.init_nu", v, line))
    c.collapse.init_nu = to_double(origin, line, "collapse.init_nu", v);
  if (kv.take("collapse.init_beta", v, line))
    c.collapse.init_beta = to_double(origin, line, "collapse.init_beta", v);
  if (kv.take("collapse.restarts", v, line)) {
    c.collapse.options.restarts = static_cast<int>(to_int(origin, line, "collapse.restarts", v));
    if (c.collapse.options.restarts < 1) fail(origin, line, "collapse.restarts must be >= 1");
  }
  if (kv.take("collapse.margin", v, line))
    c.collapse.options.margin = to_double(origin, line, "collapse.margin", v);
  if (kv.take("collapse.max_iters", v, line))
    c.collapse.options.max_iters = static_cast<int>(to_int(origin, line, "collapse.max_iters", v));
  if (kv.take("collapse.rel_tol", v, line))
    c.collapse.options.rel_tol = to_double(origin, line, "collapse.rel_tol", v);
  if (kv.take("collapse.jitter_seed", v, line))
    c.collapse.options.jitter_seed = to_u64(origin, line, "collapse.jitter_seed", v);

  kv.finish();
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  return parse_config_text(read_text(path), path);
}

std::string RunConfig::resolved_text() const {
  std::ostringstream ss;
  if (command) ss << "command = " << nhent::to_string(*command) << "\n";
  ss << "output_dir = " << output_dir << "\n";
  ss << "base_seed = " << base_seed << "\n";
  ss << "workers = " << workers << "\n";
  ss << "resume = " << (resume ? "true" : "false") << "\n";
  ss << "boundary = " << nhent::to_string(boundary) << "\n";
  ss << "model.J = " << format_g17(J) << "\n";
  ss << "model.gamma = " << format_g17(gamma) << "\n";
  ss << "model.W = " << format_g17(W) << "\n";
  ss << "model.L = " << L << "\n";
  ss << "schedule.dt = " << format_g17(schedule.dt) << "\n";
  ss << "schedule.n_steps = " << schedule.n_steps << "\n";
  ss << "schedule.record_last = " << schedule.record_last << "\n";
  ss << "schedule.health_stride = " << schedule.health_stride << "\n";
  auto join_d = [](const std::vector<double>& xs) {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + format_g17(xs[i]);
    return out;
  };
  auto join_i = [](const std::vector<int>& xs) {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
    return out;
  };
  ss << "sweep.gamma_list = " << join_d(gamma_list) << "\n";
  ss << "sweep.W_list = " << join_d(W_list) << "\n";
  ss << "sweep.L_list = " << join_i(L_list) << "\n";
  ss << "sweep.realizations = " << realizations << "\n";
  ss << "sweep.observables = " << (observables ? flags_to_string(*observables) : "default")
     << "\n";
  ss << "sweep.profile_stride = " << profile_stride << "\n";
  ss << "spectral.W_list = " << join_d(spectral.W_list) << "\n";
  ss << "spectral.realizations = " << spectral.realizations << "\n";
  ss << "spectral.bins = " << spectral.bins << "\n";
  ss << "spectral.n_sites = " << spectral.n_sites << "\n";
  ss << "spectral.asymptotic = " << (spectral.asymptotic ? "true" : "false") << "\n";
  ss << "collapse.input = " << collapse.input << "\n";
  ss << "collapse.init_Wc = " << (collapse.init_Wc ? format_g17(*collapse.init_Wc) : "auto")
     << "\n";
  ss << "collapse.init_nu = " << format_g17(collapse.init_nu) << "\n";
  ss << "collapse.init_beta = " << format_g17(collapse.init_beta) << "\n";
  ss << "collapse.restarts = " << collapse.options.restarts << "\n";
  ss << "collapse.margin = " << format_g17(collapse.options.margin) << "\n";
  ss << "collapse.max_iters = " << collapse.options.max_iters << "\n";
  ss << "collapse.rel_tol = " << format_g17(collapse.options.rel_tol) << "\n";
  ss << "collapse.jitter_seed = " << collapse.options.jitter_seed << "\n";
  return ss.str();
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

namespace {

void write_manifest(const fs::path& dir, const std::string& command,
                    const std::vector<std::string>& files) {
  json m;
  m["command"] = command;
  m["version"] = kVersion;
  json outs = json::array();
  for (const std::string& f : files)
    outs.push_back(json{{"file", f}, {"checksum", fnv1a64_hex(read_text(dir / f))}});
  m["outputs"] = outs;
  write_text_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

SweepConfig sweep_config_from(const RunConfig& c) {
  SweepConfig sc;
  sc.J = c.J;
  sc.gamma_list = c.gamma_list.empty() ? std::vector<double>{c.gamma} : c.gamma_list;
  sc.W_list = c.W_list;
  sc.L_list = c.L_list.empty() ? std::vector<int>{c.L} : c.L_list;
  sc.realizations = c.realizations;
  sc.schedule = c.schedule;
  sc.base_seed = c.base_seed;
  sc.boundary = c.boundary;
  sc.observables = c.observables.value_or(ObservableFlags{});
  sc.profile_stride = c.profile_stride;
  sc.workers = std::max(1, c.workers);
  return sc;
}

int run_simulate(const RunConfig& c) {
  ModelParams params{c.J, c.gamma, c.W, c.L, c.boundary};
  const ObservableFlags flags =
      c.observables.value_or(ObservableFlags{true, true, true, true, true});

  const ObservableRecord rec =
      run_point(params, c.realizations, c.schedule, c.base_seed, PointKey{0, 0}, flags,
                std::max(1, c.workers), c.profile_stride);

  // hash over the equivalent single-point sweep
  SweepConfig sc = sweep_config_from(c);
  sc.gamma_list = {c.gamma};
  sc.W_list = {c.W};
  sc.L_list = {c.L};
  sc.observables = flags;
  const std::string hash = sc.config_hash();

  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  std::vector<std::string> files;

  const std::string point_file = point_filename(c.gamma, c.W, c.L);
  write_text_atomic(dir / point_file, record_to_json(rec, hash));
  files.push_back(point_file);

  if (rec.entropy_profile) {
    std::ostringstream csv;
    csv << "l,S,S_err\n";
    for (int l = 1; l <= c.L - 1; ++l)
      csv << l << "," << format_g17(rec.entropy_profile->mean[l - 1]) << ","
          << format_g17(rec.entropy_profile->stderr_[l - 1]) << "\n";
    write_text_atomic(dir / "entropy_profile.csv", csv.str());
    files.push_back("entropy_profile.csv");
  }
  if (rec.density) {
    std::ostringstream csv;
    csv << "site,n,n_err\n";
    for (int i = 1; i <= c.L; ++i)
      csv << i << "," << format_g17(rec.density->mean[i - 1]) << ","
          << format_g17(rec.density->stderr_[i - 1]) << "\n";
    write_text_atomic(dir / "density.csv", csv.str());
    files.push_back("density.csv");
  }
  if (rec.correlation) {
    std::ostringstream csv;
    csv << "l,chord,C,C_err\n";
    for (int l = 1; l <= c.L / 2; ++l)
      csv << l << "," << format_g17(chord_coordinate(l, c.L)) << ","
          << format_g17(rec.correlation->mean[l - 1]) << ","
          << format_g17(rec.correlation->stderr_[l - 1]) << "\n";
    write_text_atomic(dir / "correlation.csv", csv.str());
    files.push_back("correlation.csv");
  }

  RunConfig resolved = c;
  resolved.observables = flags;
  write_text_atomic(dir / "resolved_config.txt", resolved.resolved_text());
  files.push_back("resolved_config.txt");
  write_manifest(dir, "simulate", files);
  std::printf("simulate: wrote %zu files to %s\n", files.size() + 1, dir.string().c_str());
  return 0;
}

int run_sweep_command(const RunConfig& c) {
  if (c.W_list.empty()) throw ConfigError("sweep requires a nonempty sweep.W_list");
  SweepConfig sc = sweep_config_from(c);
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);

  RunConfig resolved = c;
  resolved.observables = sc.observables;
  resolved.gamma_list = sc.gamma_list;
  resolved.L_list = sc.L_list;
  write_text_atomic(dir / "resolved_config.txt", resolved.resolved_text());

  const SweepResult result = run_sweep(sc, dir, c.resume, [](const std::string& msg) {
    std::printf("  %s\n", msg.c_str());
    std::fflush(stdout);
  });
  std::printf("sweep: %zu points complete, %zu failed, results in %s\n", result.records.size(),
              result.failed_points.size(), dir.string().c_str());
  return result.failed_points.empty() ? 0 : 1;
}

int run_collapse_command(const RunConfig& c) {
  if (c.collapse.input.empty()) throw ConfigError("collapse requires collapse.input (a CSV path)");
  const CsvTable table = read_csv(c.collapse.input);
  const int col_g = table.column("gamma");
  const int col_w = table.column("W");
  const int col_l = table.column("L");
  const int col_y = table.column("S_half");
  const int col_e = table.column("S_half_err");
  if (col_g < 0 || col_w < 0 || col_l < 0 || col_y < 0)
    throw ConfigError("collapse input needs columns gamma,W,L,S_half");

  std::map<double, CollapseDataset> by_gamma;
  for (const auto& row : table.rows) {
    CollapseRow r;
    r.W = std::stod(row[col_w]);
    r.L = std::stoi(row[col_l]);
    r.y = std::stod(row[col_y]);
    r.y_err = col_e >= 0 ? std::stod(row[col_e]) : 0.0;
    by_gamma[std::stod(row[col_g])].rows.push_back(r);
  }

  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  std::vector<std::string> files;
  json report = json::array();

  for (auto& [gamma, data] : by_gamma) {
    data.validate();
    CollapseParams init{0.0, c.collapse.init_nu, c.collapse.init_beta};
    if (c.collapse.init_Wc) {
      init.W_c = *c.collapse.init_Wc;
    } else {
      // start from the S(W) peak of the largest size: the entanglement
      // maximum sits near the transition
      const int Lmax = data.distinct_L().back();
      double best = -1.0;
      for (const auto& row : data.rows)
        if (row.L == Lmax && row.y > best) {
          best = row.y;
          init.W_c = row.W;
        }
    }

    CollapseFit fit = fit_collapse(data, init, c.collapse.options);
    json entry;
    entry["gamma"] = gamma;
    entry["W_c"] = fit.params.W_c;
    entry["nu"] = fit.params.nu;
    entry["beta"] = fit.params.beta;
    entry["loss"] = fit.loss;
    entry["loss_unnormalized"] = fit.loss_unnormalized;
    entry["rows_used"] = fit.rows_used;
    entry["converged"] = fit.converged;
    entry["init"] = {{"W_c", init.W_c}, {"nu", init.nu}, {"beta", init.beta}};
    try {
      estimate_uncertainty(data, fit, c.collapse.options);
      entry["uncertainty"] = {{"W_c", fit.uncertainty.W_c},
                              {"nu", fit.uncertainty.nu},
                              {"beta", fit.uncertainty.beta}};
      entry["subsets"] = fit.subsets_used;
    } catch (const std::exception& e) {
      entry["uncertainty"] = nullptr;
      entry["uncertainty_note"] = e.what();
    }
    try {
      entry["tail_exponent"] = tail_exponent_check(data, fit);
      entry["nu_beta"] = fit.params.nu * fit.params.beta;
    } catch (const std::exception& e) {
      entry["tail_exponent"] = nullptr;
    }
    try {
      entry["critical_slope"] = critical_size_scaling_slope(data, fit.params.W_c);
    } catch (const std::exception& e) {
      entry["critical_slope"] = nullptr;
    }
    report.push_back(entry);

    // collapsed curves for plotting
    std::ostringstream csv;
    csv << "x,y,L\n";
    std::vector<CollapseRow> rows = data.rows;
    std::sort(rows.begin(), rows.end(), [](const CollapseRow& a, const CollapseRow& b) {
      return a.L != b.L ? a.L < b.L : a.W < b.W;
    });
    for (const auto& row : rows) {
      if (row.W < fit.params.W_c - c.collapse.options.margin) continue;
      const double x = (row.W - fit.params.W_c) * std::pow(row.L, 1.0 / fit.params.nu);
      const double y = row.y / std::pow(row.L, fit.params.beta);
      csv << format_g17(x) << "," << format_g17(y) << "," << row.L << "\n";
    }
    const std::string name = "collapsed_g" + format_g(gamma) + ".csv";
    write_text_atomic(dir / name, csv.str());
    files.push_back(name);

    std::printf("collapse gamma=%g: W_c=%.4f nu=%.3f beta=%.3f loss=%.3e\n", gamma,
                fit.params.W_c, fit.params.nu, fit.params.beta, fit.loss);
  }

  write_text_atomic(dir / "fit_report.json", report.dump(2) + "\n");
  files.push_back("fit_report.json");
  write_text_atomic(dir / "resolved_config.txt", c.resolved_text());
  files.push_back("resolved_config.txt");
  write_manifest(dir, "collapse", files);
  return 0;
}

int run_spectral_command(const RunConfig& c) {
  const std::vector<double> Ws = c.spectral.W_list.empty() ? std::vector<double>{c.W}
                                                           : c.spectral.W_list;
  const int R = c.spectral.realizations;
  const int workers = std::max(1, c.workers);

  std::ostringstream csv;
  csv << "W,O_mean,O_err,mipr_mean,mipr_err,asymptotic_mipr\n";
  json rows = json::array();

  for (size_t iw = 0; iw < Ws.size(); ++iw) {
    ModelParams params{c.J, c.gamma, Ws[iw], c.L, c.boundary};
    std::vector<double> O_vals(R), m_vals(R);
    parallel_for(R, workers, [&](int r) {
      const std::uint64_t seed = derive_seed(
          c.base_seed, {static_cast<std::uint64_t>(c.L), static_cast<std::uint64_t>(iw), 0ull,
                        static_cast<std::uint64_t>(r)});
      const Hamiltonian h = build_hamiltonian(params, sample_disorder(params, seed));
      const EigenSystem sys = eigensystem(h);
      O_vals[r] = orthogonality_index(sys.right_vectors);
      m_vals[r] = mipr(sys.right_vectors);
    });
    auto stat = [R](const std::vector<double>& v) {
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= R;
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      var = R > 1 ? var / (R - 1) : 0.0;
      return std::pair<double, double>(mean, std::sqrt(var / R));
    };
    const auto [O_mean, O_err] = stat(O_vals);
    const auto [m_mean, m_err] = stat(m_vals);

    json row{{"W", Ws[iw]}, {"O", {{"mean", O_mean}, {"stderr", O_err}}},
             {"mipr", {{"mean", m_mean}, {"stderr", m_err}}}};
    csv << format_g17(Ws[iw]) << "," << format_g17(O_mean) << "," << format_g17(O_err) << ","
        << format_g17(m_mean) << "," << format_g17(m_err);
    if (c.spectral.asymptotic && std::abs(c.gamma) < std::abs(c.J)) {
      const AsymptoticMipr am =
          asymptotic_mipr(params, R, c.spectral.bins, c.spectral.n_sites,
                          derive_seed(c.base_seed, {0xA577ull, static_cast<std::uint64_t>(iw)}));
      row["asymptotic_mipr"] = am.value;
      row["asymptotic_bins_flagged"] = am.bins_flagged;
      csv << "," << format_g17(am.value) << "\n";
    } else {
      row["asymptotic_mipr"] = nullptr;
      csv << ",nan\n";
    }
    rows.push_back(row);
    std::printf("spectral W=%g: O=%.4f mipr=%.4f\n", Ws[iw], O_mean, m_mean);
    std::fflush(stdout);
  }

  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  write_text_atomic(dir / "spectral.csv", csv.str());
  json out{{"rows", rows}};
  write_text_atomic(dir / "spectral.json", out.dump(2) + "\n");
  write_text_atomic(dir / "resolved_config.txt", c.resolved_text());
  write_manifest(dir, "spectral", {"spectral.csv", "spectral.json", "resolved_config.txt"});
  return 0;
}

struct OracleCheckLine {
  std::string name;
  double residual;
  double tolerance;
};

int run_oracle_check(const RunConfig& c) {
  std::vector<OracleCheckLine> lines;

  // engine vs brute force on small chains
  double worst_d = 0.0, worst_s = 0.0;
  int idx = 0;
  for (int L : {6, 8, 10}) {
    for (double gamma : {0.0, -0.5, 0.5}) {
      for (double W : {0.0, 2.0}) {
        for (double t : {2.0, 20.0}) {
          ModelParams params{1.0, gamma, W, L, Boundary::Open};
          const auto dis =
              sample_disorder(params, derive_seed(c.base_seed, {0x0AC1Eull, (std::uint64_t)idx}));
          ++idx;
          const Hamiltonian h = build_hamiltonian(params, dis);
          const ManyBodyState ref = brute_force_evolution(h, t);

          Schedule sched;
          sched.dt = 2.0;
          sched.n_steps = static_cast<int>(std::llround(t / sched.dt));
          sched.record_last = 1;
          const auto ds = evolve_trajectory(params, dis, sched);
          const CorrelationMatrix& d_engine = ds.back();
          const CorrelationMatrix d_ref = ref.correlation();
          worst_d = std::max(worst_d, (d_engine.D - d_ref.D).cwiseAbs().maxCoeff());
          for (int l = 1; l <= L - 1; ++l) {
            const Subsystem A = Subsystem::range(1, l);
            worst_s = std::max(worst_s,
                               std::abs(entanglement_entropy(d_engine, A) - ref.entropy(A)));
          }
        }
      }
    }
  }
  lines.push_back({"brute-force correlation residual", worst_d, 1e-8});
  lines.push_back({"brute-force entropy residual", worst_s, 1e-8});

  // clean-PBC analytic state
  {
    const int L = 256;
    const CorrelationMatrix d = clean_pbc_correlation(L);
    const double s = entanglement_entropy(d, Subsystem::range(1, L / 2));
    const double target = std::log(static_cast<double>(L)) / 3.0 + 0.34;
    lines.push_back({"clean-PBC half-cut entropy vs (1/3)lnL+0.34", std::abs(s - target), 0.05});
    Eigen::SelfAdjointEigenSolver<MatrixC> es(0.5 * (d.D + d.D.adjoint()),
                                              Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    lines.push_back({"clean-PBC spectrum within [0,1]",
                     std::max(std::max(-lo, hi - 1.0), 0.0), 1e-9});
    lines.push_back({"clean-PBC gauge relation residual", gauge_check(clean_pbc_correlation(64)),
                     5e-3});
  }

  // determinism of the disorder stream
  {
    ModelParams params{1.0, -0.5, 2.0, 64, Boundary::Open};
    const auto a = sample_disorder(params, 42);
    const auto b = sample_disorder(params, 42);
    lines.push_back({"disorder determinism", (a.m - b.m).cwiseAbs().maxCoeff(), 0.0});
  }

  bool ok = true;
  json report = json::array();
  for (const auto& l : lines) {
    const bool pass = l.residual <= l.tolerance;
    ok = ok && pass;
    std::printf("%-48s %12.3e  (tol %8.1e)  %s\n", l.name.c_str(), l.residual, l.tolerance,
                pass ? "PASS" : "FAIL");
    report.push_back(json{{"check", l.name},
                          {"residual", l.residual},
                          {"tolerance", l.tolerance},
                          {"pass", pass}});
  }
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  write_text_atomic(dir / "oracle_report.json", report.dump(2) + "\n");
  write_text_atomic(dir / "resolved_config.txt", c.resolved_text());
  write_manifest(dir, "oracle-check", {"oracle_report.json", "resolved_config.txt"});
  return ok ? 0 : 1;
}

}  // namespace

int dispatch(const RunConfig& config) {
  if (!config.command) throw ConfigError("no command selected");
  switch (*config.command) {
    case Command::Simulate: return run_simulate(config);
    case Command::Sweep: return run_sweep_command(config);
    case Command::Collapse: return run_collapse_command(config);
    case Command::Spectral: return run_spectral_command(config);
    case Command::OracleCheck: return run_oracle_check(config);
  }
  return 2;
}

}  // namespace nhent
