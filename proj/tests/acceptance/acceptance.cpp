// Acceptance suite: one pass/fail line per criterion.
//
//   nhent_acceptance --criteria 1,2,3,4,7,8,9,10 [--work-dir DIR] [--workers N]
//
// Criteria 5 and 6 run a 200-realization disorder sweep (CPU-hours); their
// grid points are checkpointed under --work-dir, so interrupted runs resume.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstdarg>
#include <cstring>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "nhent/collapse.hpp"
#include "nhent/ensemble.hpp"
#include "nhent/io.hpp"
#include "nhent/evolve.hpp"
#include "nhent/model.hpp"
#include "nhent/observables.hpp"
#include "nhent/reference.hpp"
#include "nhent/rng.hpp"
#include "nhent/spectral.hpp"

using namespace nhent;

namespace {

int g_workers = 2;
bool g_all_pass = true;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s criterion-%d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  g_all_pass = g_all_pass && pass;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---- criterion 1: engine vs many-body oracle on random small instances ----

void criterion_1() {
  const int Ls[] = {6, 8, 10};
  const double gammas[] = {0.0, -0.5};
  const double Ws[] = {0.0, 2.0, 5.0};
  const double ts[] = {2.0, 10.0, 20.0};

  SplitMix64 rng(0xACC1);
  double worst_d = 0.0, worst_s = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int L = Ls[rng.next() % 3];
    ModelParams p{1.0, gammas[rng.next() % 2], Ws[rng.next() % 3], L, Boundary::Open};
    const double t = ts[rng.next() % 3];
    const auto dis = sample_disorder(p, rng.next());

    const ManyBodyState ref = brute_force_evolution(build_hamiltonian(p, dis), t);
    Schedule sch;
    sch.n_steps = static_cast<int>(std::llround(t / sch.dt));
    sch.record_last = 1;
    const CorrelationMatrix c = evolve_trajectory(p, dis, sch).back();

    worst_d = std::max(worst_d, (c.D - ref.correlation().D).cwiseAbs().maxCoeff());
    for (int l = 1; l < L; ++l) {
      const Subsystem A = Subsystem::range(1, l);
      worst_s = std::max(worst_s, std::abs(entanglement_entropy(c, A) - ref.entropy(A)));
    }
  }
  report(1, worst_d < 1e-8 && worst_s < 1e-8,
         fmt("oracle equivalence over 20 instances: max|dD| = %.2e, max|dS| = %.2e (tol 1e-8)",
             worst_d, worst_s));
}

// ---- criteria 2 and 3 share the clean-PBC steady states ----

struct CleanPbcRun {
  std::map<int, double> S;        // S_{L/2}, time-averaged
  std::vector<double> C512;      // C(l), time-averaged, L = 512
};

CleanPbcRun clean_pbc_run(const std::vector<int>& sizes) {
  CleanPbcRun out;
  std::vector<double> S(sizes.size());
  std::vector<std::vector<double>> C(sizes.size());
  parallel_for(static_cast<int>(sizes.size()), g_workers, [&](int i) {
    const int L = sizes[i];
    ModelParams p{1.0, -0.5, 0.0, L, Boundary::Periodic};
    DisorderRealization dis;
    dis.m = VectorR::Zero(L);
    Schedule sch;
    double acc = 0.0;
    int n = 0;
    std::vector<double> corr(L / 2, 0.0);
    evolve_trajectory(p, dis, sch, [&](int, const CorrelationMatrix& c) {
      acc += entanglement_entropy(c, Subsystem::range(1, L / 2));
      if (L == 512)
        for (int l = 1; l <= L / 2; ++l) corr[l - 1] += connected_correlation(c, l);
      ++n;
    });
    S[i] = acc / n;
    for (double& v : corr) v /= n;
    C[i] = std::move(corr);
  });
  for (size_t i = 0; i < sizes.size(); ++i) {
    out.S[sizes[i]] = S[i];
    if (sizes[i] == 512) out.C512 = C[i];
  }
  return out;
}

void criterion_2_3(bool want2, bool want3) {
  const std::vector<int> sizes = want2 ? std::vector<int>{64, 128, 256, 512}
                                       : std::vector<int>{512};
  const CleanPbcRun run = clean_pbc_run(sizes);

  if (want2) {
    std::vector<double> lx, ly;
    for (const auto& [L, S] : run.S) {
      lx.push_back(L);
      ly.push_back(S);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
      const double x = std::log(lx[i]);
      sx += x;
      sy += ly[i];
      sxx += x * x;
      sxy += x * ly[i];
    }
    const int n = static_cast<int>(lx.size());
    const double k = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double b = (sy - k * sx) / n;
    report(2, std::abs(k - 1.0 / 3.0) < 0.02 && std::abs(b - 0.34) < 0.05,
           fmt("clean-PBC log law: S = k ln L + b with k = %.4f (1/3 +- 0.02), b = %.4f "
               "(0.34 +- 0.05)",
               k, b));
  }
  if (want3) {
    // odd separations carry the power law; l <= L/4 keeps clear of the
    // antipode where the two degenerate top modes interfere at finite L
    std::vector<double> xs, ys;
    for (int l = 1; l <= 512 / 4; l += 2) {
      xs.push_back(chord_coordinate(l, 512));
      ys.push_back(run.C512[l - 1]);
    }
    const double slope = loglog_slope(xs, ys);
    report(3, std::abs(-slope - 2.0) < 0.15,
           fmt("clean-PBC correlations: C(l) ~ chord^-alpha with alpha = %.4f (2.0 +- 0.15)",
               -slope));
  }
}

// ---- criterion 4: clean-OBC area law ----

void criterion_4() {
  double S[2];
  const int sizes[2] = {128, 256};
  parallel_for(2, g_workers, [&](int i) {
    const int L = sizes[i];
    ModelParams p{1.0, -0.5, 0.0, L, Boundary::Open};
    DisorderRealization dis;
    dis.m = VectorR::Zero(L);
    Schedule sch;
    double acc = 0.0;
    int n = 0;
    evolve_trajectory(p, dis, sch, [&](int, const CorrelationMatrix& c) {
      acc += entanglement_entropy(c, Subsystem::range(1, L / 2));
      ++n;
    });
    S[i] = acc / n;
  });
  report(4, std::abs(S[1] - S[0]) < 0.05,
         fmt("clean-OBC area law: S(256) = %.4f, S(128) = %.4f, |diff| = %.4f (< 0.05)", S[1],
             S[0], std::abs(S[1] - S[0])));
}

// ---- criteria 5 and 6: the desk-scale transition ----

struct SweepOutcome {
  CollapseDataset data;
  CollapseFit fit;
  double peak_W = 0.0;
};

SweepOutcome desk_scale_sweep(const std::filesystem::path& work_dir) {
  SweepConfig cfg;
  cfg.gamma_list = {-0.5};
  for (int i = 0; i <= 12; ++i) cfg.W_list.push_back(2.0 + 0.25 * i);
  cfg.L_list = {32, 64, 96, 128};
  cfg.realizations = 200;
  cfg.base_seed = 1;
  cfg.workers = g_workers;

  const SweepResult res = run_sweep(cfg, work_dir, /*resume=*/true, [](const std::string& m) {
    std::printf("  [sweep] %s\n", m.c_str());
    std::fflush(stdout);
  });

  SweepOutcome out;
  for (const auto& rec : res.records)
    out.data.rows.push_back({rec.W, rec.L, rec.S_half->mean, rec.S_half->stderr_});

  // init from the entanglement peak of the largest size
  double best = -1.0;
  for (const auto& row : out.data.rows)
    if (row.L == 128 && row.y > best) {
      best = row.y;
      out.peak_W = row.W;
    }
  out.fit = fit_collapse(out.data, {out.peak_W, 2.0, 0.5});
  estimate_uncertainty(out.data, out.fit);
  return out;
}

void criterion_5_6(bool want5, bool want6, const std::filesystem::path& work_dir) {
  const SweepOutcome o = desk_scale_sweep(work_dir);
  const auto& p = o.fit.params;
  if (want5) {
    const bool ok = p.W_c >= 3.0 && p.W_c <= 3.7 && p.beta >= 0.40 && p.beta <= 0.65 &&
                    p.nu >= 1.6 && p.nu <= 2.2 && std::abs(o.peak_W - p.W_c) <= 0.5;
    report(5, ok,
           fmt("desk-scale transition: W_c = %.3f+-%.3f [3.0,3.7], beta = %.3f+-%.3f "
               "[0.40,0.65], nu = %.3f+-%.3f [1.6,2.2], S-peak at W = %.2f (|peak-W_c| <= 0.5)",
               p.W_c, o.fit.uncertainty.W_c, p.beta, o.fit.uncertainty.beta, p.nu,
               o.fit.uncertainty.nu, o.peak_W));
  }
  if (want6) {
    const double slope = critical_size_scaling_slope(o.data, p.W_c);
    report(6, slope >= 0.35 && slope <= 0.65,
           fmt("critical algebraic scaling: S_{L/2} ~ L^%.3f at W = %.3f ([0.35, 0.65])", slope,
               p.W_c));
  }
}

// ---- criterion 7: synthetic collapse recovery ----

CollapseDataset synthetic_collapse(double Wc, double nu, double beta, double noise,
                                   std::uint64_t seed) {
  CollapseDataset d;
  SplitMix64 rng(seed);
  for (int L : {32, 64, 128, 256})
    for (int i = 0; i <= 100; ++i) {
      const double W = 3.0 + 0.02 * i;
      const double x = (W - Wc) * std::pow(L, 1.0 / nu);
      const double tau = 0.5 * (x + std::sqrt(x * x + 4.0));
      double y = std::pow(L, beta) * std::pow(tau, -nu * beta);
      y *= 1.0 + noise * rng.uniform(-1.0, 1.0);
      d.rows.push_back({W, L, y, noise * y});
    }
  return d;
}

void criterion_7() {
  const double Wc = 3.35, nu = 1.9, beta = 0.5;
  const CollapseFit noiseless = fit_collapse(synthetic_collapse(Wc, nu, beta, 0.0, 5),
                                             {3.2, 2.1, 0.45});
  const CollapseFit noisy = fit_collapse(synthetic_collapse(Wc, nu, beta, 0.01, 6),
                                         {3.2, 2.1, 0.45});
  auto rel = [](double a, double b) { return std::abs(a / b - 1.0); };
  const double e0 = std::max({rel(noiseless.params.W_c, Wc), rel(noiseless.params.nu, nu),
                              rel(noiseless.params.beta, beta)});
  const double e1 = std::max({rel(noisy.params.W_c, Wc), rel(noisy.params.nu, nu),
                              rel(noisy.params.beta, beta)});
  report(7, e0 < 1e-3 && e1 < 0.02,
         fmt("synthetic collapse recovery: noiseless max err = %.4f%% (< 0.1%%), 1%% noise max "
             "err = %.3f%% (< 2%%)",
             100 * e0, 100 * e1));
}

// ---- criterion 8: spectral phases and the MIPR minimum ----

void criterion_8() {
  std::vector<double> Wgrid;
  for (int i = 1; i <= 12; ++i) Wgrid.push_back(0.5 * i);
  const int R = 50, L = 128;

  std::vector<double> O_mean(Wgrid.size(), 0.0), M_mean(Wgrid.size(), 0.0);
  for (size_t iw = 0; iw < Wgrid.size(); ++iw) {
    ModelParams p{1.0, -0.5, Wgrid[iw], L, Boundary::Open};
    std::vector<double> O(R), M(R);
    parallel_for(R, g_workers, [&](int r) {
      const auto dis = sample_disorder(
          p, derive_seed(1, {(std::uint64_t)L, iw, 0ull, (std::uint64_t)r}));
      const EigenSystem sys = eigensystem(build_hamiltonian(p, dis));
      O[r] = orthogonality_index(sys.right_vectors);
      M[r] = mipr(sys.right_vectors);
    });
    O_mean[iw] = std::accumulate(O.begin(), O.end(), 0.0) / R;
    M_mean[iw] = std::accumulate(M.begin(), M.end(), 0.0) / R;
  }

  const double O_low = O_mean.front();   // W = 0.5
  const double O_high = O_mean.back();   // W = 6.0
  const size_t imin_d = std::min_element(M_mean.begin(), M_mean.end()) - M_mean.begin();

  // The dip window applies to the asymptotic-envelope MIPR; at L = 128 the
  // direct MIPR bottoms out lower (W ~ 2.6, a finite-size offset) and is
  // reported for reference only.
  std::vector<double> A_mean(Wgrid.size(), 0.0);
  for (size_t iw = 0; iw < Wgrid.size(); ++iw) {
    ModelParams p{1.0, -0.5, Wgrid[iw], L, Boundary::Open};
    A_mean[iw] = asymptotic_mipr(p, R, 101, 100000, derive_seed(1, {0xA577ull, iw})).value;
  }
  const size_t imin = std::min_element(A_mean.begin(), A_mean.end()) - A_mean.begin();
  const bool interior = imin > 0 && imin + 1 < A_mean.size();
  const double Wmin = Wgrid[imin];
  report(8,
         O_low < 0.05 && O_high > 0.5 && interior && Wmin >= 2.8 && Wmin <= 4.0,
         fmt("spectral diagnostics (L=128, R=50): O(0.5) = %.4f (< 0.05), O(6) = %.4f (> 0.5), "
             "asymptotic-MIPR dip at W = %.2f (interior, [2.8, 4.0]; direct-MIPR minimum at "
             "W = %.2f)",
             O_low, O_high, Wmin, Wgrid[imin_d]));
}

// ---- criterion 9: transfer-matrix validity ----

void criterion_9() {
  ModelParams p{1.0, -0.5, 0.0, 128, Boundary::Open};
  const SimilarityData sim = similarity_transform(p);

  double worst_clean = 0.0;
  for (double factor : {1.5, 2.5}) {
    const auto loc = localization_length(factor * sim.Jprime, p, 200000, 17);
    worst_clean = std::max(worst_clean, std::abs(loc.xi * std::acosh(factor) - 1.0));
  }

  // envelope oracle: eigenstates of H' near E = 0 at W = 3, L = 2000; the
  // log-amplitude is fitted over a fixed distance window (an amplitude
  // window would bias the estimate toward slowly decaying tails)
  ModelParams pw{1.0, -0.5, 3.0, 2000, Boundary::Open};
  ModelParams hp = pw;
  hp.J = sim.Jprime;
  hp.gamma = 0.0;
  std::vector<double> lambdas;
  for (int r = 0; r < 2; ++r) {
    const auto dis = sample_disorder(hp, derive_seed(55, {(std::uint64_t)r}));
    Eigen::SelfAdjointEigenSolver<MatrixR> es(build_hamiltonian(hp, dis).H);
    for (int n = 0; n < hp.L; ++n) {
      if (std::abs(es.eigenvalues()[n]) > 0.05) continue;
      VectorR v = es.eigenvectors().col(n).cwiseAbs();
      int peak;
      v.maxCoeff(&peak);
      if (peak < 50 || peak > hp.L - 50) continue;
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int cnt = 0;
      for (int sgn : {-1, +1})
        for (int d = 5; d <= 40; ++d) {
          const double la = std::log(std::max(v[peak + sgn * d], 1e-300));
          sx += d;
          sy += la;
          sxx += double(d) * d;
          sxy += d * la;
          ++cnt;
        }
      lambdas.push_back(-(cnt * sxy - sx * sy) / (cnt * sxx - sx * sx));
    }
  }
  const double lam_env = std::accumulate(lambdas.begin(), lambdas.end(), 0.0) / lambdas.size();
  const auto loc = localization_length(0.0, pw, 1000000, 1234);
  const double rel = std::abs((1.0 / lam_env) / loc.xi - 1.0);
  report(9, worst_clean < 0.02 && rel < 0.15,
         fmt("transfer matrix: clean out-of-band xi error = %.3f%% (< 2%%); W=3 envelope xi = "
             "%.3f vs TM %.3f, rel = %.1f%% (< 15%%, %zu states)",
             100 * worst_clean, 1.0 / lam_env, loc.xi, 100 * rel, lambdas.size()));
}

// ---- criterion 10: worker-count-independent, byte-identical sweeps ----

void criterion_10(const std::filesystem::path& work_dir) {
  namespace fs = std::filesystem;
  SweepConfig cfg;
  cfg.gamma_list = {-0.5};
  cfg.W_list = {1.0, 4.0};
  cfg.L_list = {12, 16};
  cfg.realizations = 10;
  cfg.schedule.n_steps = 40;
  cfg.schedule.record_last = 10;
  cfg.base_seed = 77;
  cfg.observables.mutual_information = true;

  const fs::path a = work_dir / "det_a", b = work_dir / "det_b";
  fs::remove_all(a);
  fs::remove_all(b);
  cfg.workers = 1;
  run_sweep(cfg, a, false);
  cfg.workers = 4;
  run_sweep(cfg, b, false);

  bool same = true;
  for (const char* f : {"sweep_results.csv", "manifest.json"})
    same = same && read_text(a / f) == read_text(b / f);
  for (double W : cfg.W_list)
    for (int L : cfg.L_list)
      same = same && read_text(a / point_filename(-0.5, W, L)) ==
                         read_text(b / point_filename(-0.5, W, L));
  report(10, same, "determinism: 1-worker and 4-worker sweeps are byte-identical");
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> criteria = {1, 2, 3, 4, 7, 8, 9, 10};
  std::filesystem::path work_dir = "acceptance_work";
  g_workers = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NHENT_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) g_workers = w;
  }

  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criteria" && i + 1 < argc) {
      criteria.clear();
      const std::string list = argv[++i];
      size_t pos = 0;
      while (pos < list.size()) {
        criteria.insert(std::atoi(list.c_str() + pos));
        pos = list.find(',', pos);
        if (pos == std::string::npos) break;
        ++pos;
      }
    } else if (arg == "--work-dir" && i + 1 < argc) {
      work_dir = argv[++i];
    } else if (arg == "--workers" && i + 1 < argc) {
      g_workers = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criteria 1,2,...] [--work-dir DIR] [--workers N]\n",
                   argv[0]);
      return 2;
    }
  }
  if (g_workers < 1) g_workers = 1;
  std::filesystem::create_directories(work_dir);

  if (criteria.count(1)) criterion_1();
  if (criteria.count(2) || criteria.count(3)) criterion_2_3(criteria.count(2), criteria.count(3));
  if (criteria.count(4)) criterion_4();
  if (criteria.count(5) || criteria.count(6))
    criterion_5_6(criteria.count(5), criteria.count(6), work_dir);
  if (criteria.count(7)) criterion_7();
  if (criteria.count(8)) criterion_8();
  if (criteria.count(9)) criterion_9();
  if (criteria.count(10)) criterion_10(work_dir);

  std::printf("%s\n", g_all_pass ? "ALL PASS" : "FAILURES PRESENT");
  return g_all_pass ? 0 : 1;
}
