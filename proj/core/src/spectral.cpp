#include "nhent/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nhent/rng.hpp"

namespace nhent {

EigenSystem eigensystem(const Hamiltonian& h) {
  Eigen::EigenSolver<MatrixR> es(h.H);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  EigenSystem sys;
  sys.eigenvalues = es.eigenvalues();
  sys.right_vectors = es.eigenvectors();
  for (Eigen::Index n = 0; n < sys.right_vectors.cols(); ++n)
    sys.right_vectors.col(n).normalize();
  return sys;
}

double orthogonality_index(const MatrixC& U) {
  if (U.rows() != U.cols()) throw std::invalid_argument("orthogonality index needs a square U");
  const Eigen::Index L = U.rows();
  Eigen::PartialPivLU<MatrixC> lu(U);
  double logdet = 0.0;
  for (Eigen::Index k = 0; k < L; ++k) {
    const double p = std::abs(lu.matrixLU()(k, k));
    if (p == 0.0) return 0.0;
    logdet += std::log(p);
  }
  return std::exp(logdet / static_cast<double>(L));
}

double mipr(const MatrixC& U) {
  return U.array().abs2().square().colwise().sum().mean();
}

LocalizationResult localization_length(double E, const ModelParams& params,
                                       std::int64_t n_sites, std::uint64_t seed) {
  if (n_sites < 1000) throw std::invalid_argument("transfer matrix needs n_sites >= 1000");
  const SimilarityData sim = similarity_transform(params);
  const double t = sim.Jprime / 2.0;  // H' nearest-neighbor element is -J'/2

  SplitMix64 rng(seed);
  const double half = params.W / 2.0;

  // psi_{x+1} = ((m_x - E)/t) psi_x - psi_{x-1}, renormalized every step
  double a = 1.0, b = 0.0;  // (psi_x, psi_{x-1})
  const std::int64_t warmup = std::min<std::int64_t>(1000, n_sites / 10);
  for (std::int64_t x = 0; x < warmup; ++x) {
    const double m = rng.uniform(-half, half);
    const double next = ((m - E) / t) * a - b;
    const double nrm = std::hypot(next, a);
    b = a / nrm;
    a = next / nrm;
  }

  constexpr int kSegments = 16;
  const std::int64_t seg_len = n_sites / kSegments;
  double seg_sum[kSegments] = {};
  for (int s = 0; s < kSegments; ++s) {
    double acc = 0.0;
    for (std::int64_t x = 0; x < seg_len; ++x) {
      const double m = rng.uniform(-half, half);
      const double next = ((m - E) / t) * a - b;
      const double nrm = std::hypot(next, a);
      acc += std::log(nrm);
      b = a / nrm;
      a = next / nrm;
    }
    seg_sum[s] = acc / seg_len;
  }

  LocalizationResult res;
  double mean = 0.0;
  for (double v : seg_sum) mean += v;
  mean /= kSegments;
  double var = 0.0;
  for (double v : seg_sum) var += (v - mean) * (v - mean);
  var /= (kSegments - 1);

  res.lambda = mean;
  res.stderr_ = std::sqrt(var / kSegments);
  res.xi = mean > 0.0 ? 1.0 / mean : std::numeric_limits<double>::infinity();
  res.converged = res.stderr_ <= 0.2 * std::max(mean, 1e-300);
  return res;
}

Histogram density_of_states(const ModelParams& params, int R, int bins, std::uint64_t seed) {
  if (R < 1 || bins < 1) throw std::invalid_argument("density of states needs R >= 1, bins >= 1");
  ModelParams hermitian = params;
  const SimilarityData sim = similarity_transform(params);
  hermitian.J = sim.Jprime;
  hermitian.gamma = 0.0;

  std::vector<double> evals;
  evals.reserve(static_cast<size_t>(R) * params.L);
  for (int r = 0; r < R; ++r) {
    const auto dis = sample_disorder(hermitian, derive_seed(seed, {0xD05u, (std::uint64_t)r}));
    const Hamiltonian hp = build_hamiltonian(hermitian, dis);
    Eigen::SelfAdjointEigenSolver<MatrixR> es(hp.H, Eigen::EigenvaluesOnly);
    for (double e : es.eigenvalues()) evals.push_back(e);
  }

  Histogram hist;
  hist.lo = *std::min_element(evals.begin(), evals.end());
  hist.hi = *std::max_element(evals.begin(), evals.end());
  if (hist.hi <= hist.lo) hist.hi = hist.lo + 1e-12;
  hist.counts.assign(bins, 0);
  for (double e : evals) {
    int b = static_cast<int>((e - hist.lo) / (hist.hi - hist.lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    ++hist.counts[b];
  }
  hist.total = static_cast<std::int64_t>(evals.size());
  return hist;
}

double asymptotic_ipr(double r, double xi, int x_n, int L) {
  if (!(r > 0.0) || !(xi > 0.0)) throw std::invalid_argument("asymptotic IPR needs r > 0, xi > 0");
  if (x_n < 1 || x_n > L) throw std::invalid_argument("asymptotic IPR needs 1 <= x_n <= L");
  const double logr = std::log(r);
  double wmax = -std::numeric_limits<double>::infinity();
  std::vector<double> w(L);
  for (int x = 1; x <= L; ++x) {
    w[x - 1] = x * logr - std::abs(x - x_n) / xi;
    wmax = std::max(wmax, w[x - 1]);
  }
  double z = 0.0, z2 = 0.0;
  for (double v : w) {
    z += std::exp(v - wmax);
    z2 += std::exp(2.0 * (v - wmax));
  }
  return z2 / (z * z);
}

AsymptoticMipr asymptotic_mipr(const ModelParams& params, int R, int bins,
                               std::int64_t n_sites, std::uint64_t seed) {
  const SimilarityData sim = similarity_transform(params);
  const Histogram dos = density_of_states(params, R, bins, derive_seed(seed, {0x0D0Eu}));

  AsymptoticMipr out;
  double acc = 0.0, mass = 0.0;
  for (int b = 0; b < dos.bins(); ++b) {
    if (dos.counts[b] == 0) continue;
    const double E = dos.center(b);
    const auto loc =
        localization_length(E, params, n_sites, derive_seed(seed, {0x7157u, (std::uint64_t)b}));
    if (!loc.converged) ++out.bins_flagged;
    // Eq. profile r^x e^{-|x-x_n|/xi_density}: the transfer matrix gives the
    // amplitude decay rate, the density decays twice as fast.
    const double xi_density = loc.xi / 2.0;
    const double m = dos.mass(b);
    acc += m * asymptotic_ipr(sim.r, xi_density, params.L / 2, params.L);
    mass += m;
    ++out.bins_used;
  }
  out.value = acc / mass;
  return out;
}

}  // namespace nhent
