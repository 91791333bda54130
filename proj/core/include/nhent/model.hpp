#pragma once

#include <cstdint>
#include <string>

#include "nhent/types.hpp"

namespace nhent {

enum class Boundary { Open, Periodic };

std::string to_string(Boundary b);

// Static parameters of the disordered Hatano-Nelson chain
//   H = sum_i J_L c_i^+ c_{i+1} + J_R c_{i+1}^+ c_i + m_i n_i,
// J_L = -(J - gamma)/2, J_R = -(J + gamma)/2, m_i ~ U[-W/2, W/2].
struct ModelParams {
  double J = 1.0;
  double gamma = 0.0;
  double W = 0.0;
  int L = 0;  // even, >= 4
  Boundary boundary = Boundary::Open;

  double hop_left() const { return -(J - gamma) / 2.0; }   // entry (i, i+1)
  double hop_right() const { return -(J + gamma) / 2.0; }  // entry (i+1, i)

  void validate() const;  // throws std::invalid_argument
};

struct DisorderRealization {
  VectorR m;
  std::uint64_t seed = 0;
};

struct Hamiltonian {
  MatrixR H;  // dense; real-valued entries for this model
  ModelParams params;
};

// Diagonal gauge S = diag{r^{1/2}, r, ..., r^{L/2}} that maps H to the
// Hermitian H' = S^{-1} H S = H(J -> J', gamma -> 0), valid for |gamma| < |J|.
struct SimilarityData {
  double r = 1.0;       // |(J + gamma)/(J - gamma)|
  double Jprime = 0.0;  // sgn(J) sqrt(J^2 - gamma^2)
  VectorR Sdiag;        // Sdiag[i] = r^{(i+1)/2} (0-based i)
};

// i.i.d. uniform on [-W/2, W/2]; a pure function of (seed, W, L).
DisorderRealization sample_disorder(const ModelParams& params, std::uint64_t seed);

Hamiltonian build_hamiltonian(const ModelParams& params, const DisorderRealization& dis);

SimilarityData similarity_transform(const ModelParams& params);

// Spatial reflection i -> L+1-i. Swaps J_L and J_R, i.e. gamma -> -gamma.
// The evolution engine maps gamma > 0 inputs through this to the stable
// gamma < 0 propagation path.
ModelParams reflect(const ModelParams& params);
DisorderRealization reflect(const DisorderRealization& dis);

}  // namespace nhent
