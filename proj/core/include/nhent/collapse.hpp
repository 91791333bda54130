#pragma once

#include <cstdint>
#include <vector>

#include "nhent/types.hpp"

namespace nhent {

struct CollapseRow {
  double W = 0.0;
  int L = 0;
  double y = 0.0;      // S_{L/2}(W, L)
  double y_err = 0.0;
};

struct CollapseDataset {
  std::vector<CollapseRow> rows;

  void validate() const;  // >= 2 distinct L, >= 3 distinct W, y >= 0
  std::vector<int> distinct_L() const;
};

struct CollapseParams {
  double W_c = 0.0;
  double nu = 1.0;
  double beta = 0.0;
};

struct CollapseOptions {
  double margin = 0.35;        // fit domain W >= W_c - margin
  int restarts = 8;            // jittered simplex restarts
  double jitter = 0.10;        // +-10% per parameter
  std::uint64_t jitter_seed = 0x5eedULL;
  int max_iters = 2000;
  double rel_tol = 1e-8;
  // broad box; outside it the objective is +inf
  double nu_min = 0.5, nu_max = 5.0;
  double beta_min = 0.0, beta_max = 1.0;
};

struct CollapseFit {
  CollapseParams params;
  double loss = 0.0;                // normalized (per contributing row)
  double loss_unnormalized = 0.0;   // plain sum of squared deviations
  int rows_used = 0;
  bool converged = true;
  CollapseParams uncertainty;       // filled by estimate_uncertainty
  std::vector<std::vector<int>> subsets_used;
};

// Collapse-quality loss: x = (W - W_c) L^{1/nu}, y = S / L^beta; rows whose x
// falls in the common x-window of all size curves are compared against the
// mean of linear interpolations of the other curves; returns the mean squared
// deviation over contributing rows (+inf when fewer than 2 curves overlap).
double collapse_loss(const CollapseDataset& data, double W_c, double nu, double beta);
double collapse_loss_unnormalized(const CollapseDataset& data, double W_c, double nu,
                                  double beta);

// Nelder-Mead descent from `restarts` jittered initializations, restricted to
// rows with W >= W_c - margin. Deterministic for fixed (data, init, options).
CollapseFit fit_collapse(const CollapseDataset& data, CollapseParams init,
                         const CollapseOptions& options = {});

// Refits on size subsets and returns per-parameter standard deviations; also
// records the subsets on the fit. An empty subset list means drop-one-L.
CollapseParams estimate_uncertainty(const CollapseDataset& data, CollapseFit& fit,
                                    const CollapseOptions& options = {},
                                    std::vector<std::vector<int>> size_subsets = {});

// log-log slope of the largest-L S_{L/2} against (W - W_c) on W > W_c + offset;
// compare against -nu*beta.
double tail_exponent_check(const CollapseDataset& data, const CollapseFit& fit,
                           double offset = 0.5);

// log-log slope of S_{L/2} against L at the grid W nearest to W_c; the
// algebraic-scaling exponent beta at criticality.
double critical_size_scaling_slope(const CollapseDataset& data, double W_c);

}  // namespace nhent
