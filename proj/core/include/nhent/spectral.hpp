#pragma once

#include <cstdint>
#include <vector>

#include "nhent/model.hpp"
#include "nhent/types.hpp"

namespace nhent {

struct EigenSystem {
  VectorC eigenvalues;
  MatrixC right_vectors;  // columns normalized to unit Euclidean norm
};

// Full right eigensystem of the (generally non-Hermitian) Hamiltonian.
EigenSystem eigensystem(const Hamiltonian& h);

// O = |det U|^{1/L}, evaluated from LU pivots in the log domain (raw
// determinants underflow in the skin phase). 0 for an exactly singular U.
double orthogonality_index(const MatrixC& U);

// Mean inverse participation ratio over the columns of U: mean_n sum_x |U_xn|^4.
double mipr(const MatrixC& U);

struct LocalizationResult {
  double xi = 0.0;       // 1 / lambda, lattice units (amplitude decay length)
  double lambda = 0.0;   // Lyapunov exponent of the transfer-matrix product
  double stderr_ = 0.0;  // standard error over chain segments
  bool converged = true; // false when stderr_ > 20% of lambda
};

// Lyapunov exponent of the Hermitian H' chain (nearest-neighbor element
// -J'/2, same disorder law) at energy E, from a renormalized transfer-matrix
// product over n_sites sites.
LocalizationResult localization_length(double E, const ModelParams& params,
                                       std::int64_t n_sites, std::uint64_t seed);

struct Histogram {
  double lo = 0.0, hi = 0.0;
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;

  int bins() const { return static_cast<int>(counts.size()); }
  double width() const { return (hi - lo) / bins(); }
  double center(int b) const { return lo + (b + 0.5) * width(); }
  double mass(int b) const { return static_cast<double>(counts[b]) / total; }
  double density(int b) const { return mass(b) / width(); }
};

// Normalized histogram of all eigenvalues of H' over R disorder realizations.
Histogram density_of_states(const ModelParams& params, int R, int bins, std::uint64_t seed);

// IPR of the normalized profile p(x) proportional to r^x e^{-|x - x_n|/xi}
// on x = 1..L, summed in the log domain so extreme r or xi cannot overflow.
double asymptotic_ipr(double r, double xi, int x_n, int L);

struct AsymptoticMipr {
  double value = 0.0;
  int bins_used = 0;
  int bins_flagged = 0;  // bins whose Lyapunov estimate did not converge
};

// DOS-weighted average of the asymptotic IPR: the profile at bin energy E
// uses xi(E)/2 from the transfer matrix (amplitude -> density decay length)
// and x_n = L/2.
AsymptoticMipr asymptotic_mipr(const ModelParams& params, int R, int bins,
                               std::int64_t n_sites, std::uint64_t seed);

}  // namespace nhent
