#include "nhent/collapse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "nhent/rng.hpp"

namespace nhent {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Curve {
  std::vector<double> x, y;  // sorted by x
};

// scaled curves grouped by L; empty optional-like flag via curves.size()
std::map<int, Curve> scale_curves(const CollapseDataset& data, double W_c, double nu,
                                  double beta) {
  std::map<int, Curve> curves;
  for (const auto& row : data.rows) {
    const double x = (row.W - W_c) * std::pow(row.L, 1.0 / nu);
    const double y = row.y / std::pow(row.L, beta);
    auto& c = curves[row.L];
    c.x.push_back(x);
    c.y.push_back(y);
  }
  for (auto& [L, c] : curves) {
    std::vector<int> idx(c.x.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::sort(idx.begin(), idx.end(), [&c](int a, int b) { return c.x[a] < c.x[b]; });
    Curve s;
    for (int i : idx) {
      s.x.push_back(c.x[i]);
      s.y.push_back(c.y[i]);
    }
    c = std::move(s);
  }
  return curves;
}

double interp(const Curve& c, double x) {
  auto it = std::lower_bound(c.x.begin(), c.x.end(), x);
  if (it == c.x.begin()) return c.y.front();
  if (it == c.x.end()) return c.y.back();
  const size_t hi = it - c.x.begin();
  const size_t lo = hi - 1;
  const double t = (x - c.x[lo]) / (c.x[hi] - c.x[lo]);
  return (1.0 - t) * c.y[lo] + t * c.y[hi];
}

struct LossParts {
  double sum = kInf;  // sum of squared deviations from the cross-curve mean
  int used = 0;       // contributing rows
  double spread = 0;  // total variance of the contributing scaled y values
};

LossParts loss_core(const CollapseDataset& data, double W_c, double nu, double beta) {
  if (!(nu > 0.0) || !std::isfinite(W_c) || !std::isfinite(beta)) return {};
  const auto curves = scale_curves(data, W_c, nu, beta);
  if (curves.size() < 2) return {};

  double win_lo = -kInf, win_hi = kInf;
  for (const auto& [L, c] : curves) {
    win_lo = std::max(win_lo, c.x.front());
    win_hi = std::min(win_hi, c.x.back());
  }
  if (!(win_lo <= win_hi)) return {};

  double sum = 0.0, ysum = 0.0, yysum = 0.0;
  int used = 0;
  for (const auto& [L, c] : curves) {
    for (size_t i = 0; i < c.x.size(); ++i) {
      const double x = c.x[i];
      if (x < win_lo || x > win_hi) continue;
      double ybar = 0.0;
      int others = 0;
      for (const auto& [Lo, co] : curves) {
        if (Lo == L) continue;
        ybar += interp(co, x);
        ++others;
      }
      if (others == 0) continue;
      ybar /= others;
      const double d = c.y[i] - ybar;
      sum += d * d;
      ysum += c.y[i];
      yysum += c.y[i] * c.y[i];
      ++used;
    }
  }
  if (used == 0) return {};
  return {sum, used, yysum - ysum * ysum / used};
}

// Scale-invariant collapse quality used by the optimizer: the raw sum of
// squared deviations scales as c^2 under y -> c y, so with beta free a
// minimizer can always improve it by crushing y with a larger beta.
// Dividing by the spread of the scaled data removes that direction while
// keeping the same minimizer for any fixed scale.
double quality(const CollapseDataset& data, double W_c, double nu, double beta) {
  const LossParts p = loss_core(data, W_c, nu, beta);
  if (p.used == 0 || !(p.spread > 1e-300)) return kInf;
  return p.sum / p.spread;
}

CollapseDataset filter_domain(const CollapseDataset& data, double W_c, double margin) {
  CollapseDataset out;
  for (const auto& row : data.rows)
    if (row.W >= W_c - margin) out.rows.push_back(row);
  return out;
}

double slope_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---- Nelder-Mead on 3 parameters ----

using P3 = std::array<double, 3>;

struct Simplex {
  std::array<P3, 4> v;
  std::array<double, 4> f;
};

template <typename F>
P3 nelder_mead(const F& fn, P3 start, int max_iters, double rel_tol, double* fout,
               bool* converged) {
  Simplex s;
  s.v[0] = start;
  for (int i = 0; i < 3; ++i) {
    P3 p = start;
    p[i] += (p[i] != 0.0) ? 0.05 * std::abs(p[i]) : 0.025;
    s.v[i + 1] = p;
  }
  for (int i = 0; i < 4; ++i) s.f[i] = fn(s.v[i]);

  auto order = [&s]() {
    std::array<int, 4> idx = {0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&s](int a, int b) { return s.f[a] < s.f[b]; });
    Simplex t;
    for (int i = 0; i < 4; ++i) {
      t.v[i] = s.v[idx[i]];
      t.f[i] = s.f[idx[i]];
    }
    s = t;
  };

  *converged = false;
  int it = 0;
  for (; it < max_iters; ++it) {
    order();
    if (std::isfinite(s.f[3]) &&
        (s.f[3] - s.f[0]) <= rel_tol * (std::abs(s.f[0]) + std::abs(s.f[3]) + 1e-300)) {
      *converged = true;
      break;
    }
    P3 centroid = {};
    for (int i = 0; i < 3; ++i)
      for (int d = 0; d < 3; ++d) centroid[d] += s.v[i][d] / 3.0;

    auto along = [&centroid, &s](double c) {
      P3 p;
      for (int d = 0; d < 3; ++d) p[d] = centroid[d] + c * (s.v[3][d] - centroid[d]);
      return p;
    };

    const P3 refl = along(-1.0);
    const double fr = fn(refl);
    if (fr < s.f[0]) {
      const P3 exp_ = along(-2.0);
      const double fe = fn(exp_);
      if (fe < fr) {
        s.v[3] = exp_;
        s.f[3] = fe;
      } else {
        s.v[3] = refl;
        s.f[3] = fr;
      }
    } else if (fr < s.f[2]) {
      s.v[3] = refl;
      s.f[3] = fr;
    } else {
      const P3 con = along(fr < s.f[3] ? -0.5 : 0.5);
      const double fc = fn(con);
      if (fc < std::min(fr, s.f[3])) {
        s.v[3] = con;
        s.f[3] = fc;
      } else {
        for (int i = 1; i < 4; ++i) {  // shrink toward best
          for (int d = 0; d < 3; ++d) s.v[i][d] = s.v[0][d] + 0.5 * (s.v[i][d] - s.v[0][d]);
          s.f[i] = fn(s.v[i]);
        }
      }
    }
  }
  order();
  *fout = s.f[0];
  return s.v[0];
}

}  // namespace

void CollapseDataset::validate() const {
  std::set<int> Ls;
  std::set<double> Ws;
  for (const auto& row : rows) {
    if (row.y < 0.0) throw std::invalid_argument("collapse data needs y >= 0");
    if (row.L < 2) throw std::invalid_argument("collapse data has a bad system size");
    Ls.insert(row.L);
    Ws.insert(row.W);
  }
  if (Ls.size() < 2 || Ws.size() < 3)
    throw std::invalid_argument("collapse needs >= 2 distinct L and >= 3 distinct W");
}

std::vector<int> CollapseDataset::distinct_L() const {
  std::set<int> s;
  for (const auto& row : rows) s.insert(row.L);
  return {s.begin(), s.end()};
}

double collapse_loss(const CollapseDataset& data, double W_c, double nu, double beta) {
  const LossParts p = loss_core(data, W_c, nu, beta);
  if (p.used == 0) return kInf;
  return p.sum / p.used;
}

double collapse_loss_unnormalized(const CollapseDataset& data, double W_c, double nu,
                                  double beta) {
  return loss_core(data, W_c, nu, beta).sum;
}

CollapseFit fit_collapse(const CollapseDataset& data, CollapseParams init,
                         const CollapseOptions& options) {
  data.validate();
  double W_lo = kInf, W_hi = -kInf;
  for (const auto& row : data.rows) {
    W_lo = std::min(W_lo, row.W);
    W_hi = std::max(W_hi, row.W);
  }

  auto objective = [&](const P3& p) -> double {
    const double W_c = p[0], nu = p[1], beta = p[2];
    if (W_c < W_lo || W_c > W_hi) return kInf;
    if (nu < options.nu_min || nu > options.nu_max) return kInf;
    if (beta < options.beta_min || beta > options.beta_max) return kInf;
    return quality(filter_domain(data, W_c, options.margin), W_c, nu, beta);
  };

  CollapseFit best;
  double best_q = kInf;
  SplitMix64 rng(options.jitter_seed);
  for (int k = 0; k < std::max(1, options.restarts); ++k) {
    P3 start = {init.W_c, init.nu, init.beta};
    if (k > 0)
      for (double& v : start) v *= 1.0 + options.jitter * rng.uniform(-1.0, 1.0);
    double f = kInf;
    bool conv = false;
    const P3 p = nelder_mead(objective, start, options.max_iters, options.rel_tol, &f, &conv);
    if (f < best_q) {
      best.params = {p[0], p[1], p[2]};
      best_q = f;
      best.converged = conv;
    }
  }
  if (!std::isfinite(best_q))
    throw std::runtime_error("collapse fit found no overlapping curves from the given start");

  const auto domain = filter_domain(data, best.params.W_c, options.margin);
  const LossParts parts =
      loss_core(domain, best.params.W_c, best.params.nu, best.params.beta);
  best.loss = parts.used > 0 ? parts.sum / parts.used : kInf;
  best.loss_unnormalized = parts.sum;
  best.rows_used = parts.used;
  return best;
}

CollapseParams estimate_uncertainty(const CollapseDataset& data, CollapseFit& fit,
                                    const CollapseOptions& options,
                                    std::vector<std::vector<int>> size_subsets) {
  const auto sizes = data.distinct_L();
  if (size_subsets.empty()) {
    if (sizes.size() < 3)
      throw std::invalid_argument("uncertainty needs >= 3 distinct sizes for drop-one subsets");
    for (size_t drop = 0; drop < sizes.size(); ++drop) {
      std::vector<int> kept;
      for (size_t i = 0; i < sizes.size(); ++i)
        if (i != drop) kept.push_back(sizes[i]);
      size_subsets.push_back(kept);
    }
  }
  if (size_subsets.size() < 3)
    throw std::invalid_argument("uncertainty needs >= 3 size subsets");

  std::vector<CollapseParams> fits;
  fit.subsets_used.clear();
  for (const auto& subset : size_subsets) {
    if (subset.size() < 2) continue;  // degenerate subset; skipped
    CollapseDataset sub;
    for (const auto& row : data.rows)
      if (std::find(subset.begin(), subset.end(), row.L) != subset.end())
        sub.rows.push_back(row);
    try {
      CollapseOptions sub_options = options;
      sub_options.restarts = std::max(1, options.restarts / 2);
      const CollapseFit f = fit_collapse(sub, fit.params, sub_options);
      fits.push_back(f.params);
      fit.subsets_used.push_back(subset);
    } catch (const std::exception&) {
      // degenerate subset; skipped
    }
  }
  if (fits.size() < 2) throw std::runtime_error("too few usable size subsets");

  auto stddev = [&fits](double CollapseParams::* field) {
    double mean = 0.0;
    for (const auto& f : fits) mean += f.*field;
    mean /= fits.size();
    double var = 0.0;
    for (const auto& f : fits) var += (f.*field - mean) * (f.*field - mean);
    return std::sqrt(var / (fits.size() - 1));
  };
  CollapseParams u{stddev(&CollapseParams::W_c), stddev(&CollapseParams::nu),
                   stddev(&CollapseParams::beta)};
  fit.uncertainty = u;
  return u;
}

double tail_exponent_check(const CollapseDataset& data, const CollapseFit& fit,
                           double offset) {
  const auto sizes = data.distinct_L();
  const int Lmax = sizes.back();
  std::vector<double> x, y;
  for (const auto& row : data.rows)
    if (row.L == Lmax && row.W > fit.params.W_c + offset && row.y > 0.0) {
      x.push_back(row.W - fit.params.W_c);
      y.push_back(row.y);
    }
  if (x.size() < 3) throw std::runtime_error("too few tail points for the exponent check");
  return slope_loglog(x, y);
}

double critical_size_scaling_slope(const CollapseDataset& data, double W_c) {
  double W_near = data.rows.front().W;
  for (const auto& row : data.rows)
    if (std::abs(row.W - W_c) < std::abs(W_near - W_c)) W_near = row.W;
  std::vector<double> x, y;
  for (const auto& row : data.rows)
    if (row.W == W_near && row.y > 0.0) {
      x.push_back(row.L);
      y.push_back(row.y);
    }
  if (x.size() < 2) throw std::runtime_error("too few sizes at the critical W");
  return slope_loglog(x, y);
}

}  // namespace nhent
