#pragma once

#include <cstdint>
#include <vector>

#include "nhent/evolve.hpp"
#include "nhent/model.hpp"
#include "nhent/observables.hpp"
#include "nhent/types.hpp"

namespace nhent {

// Half-filled occupation basis, bitmask-ordered (site i <-> bit i-1).
struct FockBasis {
  int L = 0;
  int N = 0;
  std::vector<std::uint32_t> states;  // ascending

  static FockBasis half_filled(int L);
  int index_of(std::uint32_t state) const;  // -1 if absent
  int dim() const { return static_cast<int>(states.size()); }
};

// Normalized many-body state in a FockBasis.
struct ManyBodyState {
  FockBasis basis;
  VectorC amp;

  CorrelationMatrix correlation() const;
  // Reduced-density-matrix entropy; A must be a contiguous site range.
  double entropy(const Subsystem& A) const;
};

// Dense matrix of the second-quantized H in the given number sector.
MatrixC many_body_matrix(const Hamiltonian& h, const FockBasis& basis);

// Normalized e^{-i H t} |Neel> at full many-body resolution via a dense
// eigendecomposition of the sector matrix. Refuses L > 12.
ManyBodyState brute_force_evolution(const Hamiltonian& h, double t);

// Long-time steady state of the clean PBC chain: Slater determinant of the
// L/2 Bloch modes with the largest gamma sin k for gamma < 0, ties broken
// toward negative k (this picks k_n = 2 pi n / L, n = -L/2 .. -1). The
// occupied momenta are returned so the convention is visible to callers.
struct CleanPbcState {
  CorrelationMatrix D;
  std::vector<double> occupied_momenta;
};

CleanPbcState clean_pbc_state(int L);
CorrelationMatrix clean_pbc_correlation(int L);

// max | (U^+ D U)_{mn} - sin(pi(m-n)/2)/(pi(m-n)) | with U = diag{i, i^2, ...};
// meaningful on clean_pbc_correlation output, where the gauge-rotated matrix
// must approach the half-filled Fermi-sea kernel.
double gauge_check(const CorrelationMatrix& c);

}  // namespace nhent
