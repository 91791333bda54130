#pragma once

#include <vector>

#include "nhent/evolve.hpp"
#include "nhent/types.hpp"

namespace nhent {

// Ordered set of 1-based site indices.
struct Subsystem {
  std::vector<int> sites;

  static Subsystem range(int first, int last);  // inclusive
  void validate(int L) const;
};

// Antipodal quarters, the default pair for the mutual information:
// A = [1, L/4], B = [3L/4 + 1, L].
Subsystem left_quarter(int L);
Subsystem right_quarter(int L);

// Von Neumann entropy of subsystem A from the correlation-matrix spectrum:
// S_A = -sum [xi ln xi + (1 - xi) ln(1 - xi)] over eigenvalues xi of D_A,
// clipped to [clip, 1 - clip]. Natural-log units.
double entanglement_entropy(const CorrelationMatrix& c, const Subsystem& A,
                            double clip = 1e-12);

// S_l for the contiguous prefixes A = {1..l}, l = 1..L-1 (index l-1).
VectorR entropy_profile(const CorrelationMatrix& c, double clip = 1e-12);

// n_i = Re D_ii.
VectorR density_profile(const CorrelationMatrix& c);

// C(l) = |D_{L/2, L/2+l}|^2, valid for 1 <= l <= L/2.
double connected_correlation(const CorrelationMatrix& c, int l);

// (L/pi) sin(l pi / L), the finite-ring distance used on correlation plots.
double chord_coordinate(int l, int L);

// I_AB = S_A + S_B - S_{A u B} for disjoint A, B.
double mutual_information(const CorrelationMatrix& c, const Subsystem& A,
                          const Subsystem& B, double clip = 1e-12);

}  // namespace nhent
