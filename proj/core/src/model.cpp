#include "nhent/model.hpp"

#include <cmath>
#include <stdexcept>

#include "nhent/rng.hpp"

namespace nhent {

std::string to_string(Boundary b) {
  return b == Boundary::Open ? "open" : "periodic";
}

void ModelParams::validate() const {
  if (L < 4 || L % 2 != 0)
    throw std::invalid_argument("model.L must be even and >= 4, got " + std::to_string(L));
  if (W < 0.0) throw std::invalid_argument("model.W must be >= 0");
  if (!(std::isfinite(J) && std::isfinite(gamma) && std::isfinite(W)))
    throw std::invalid_argument("model parameters must be finite");
}

DisorderRealization sample_disorder(const ModelParams& params, std::uint64_t seed) {
  params.validate();
  DisorderRealization dis;
  dis.seed = seed;
  dis.m.resize(params.L);
  SplitMix64 rng(seed);
  const double half = params.W / 2.0;
  for (int i = 0; i < params.L; ++i) dis.m[i] = rng.uniform(-half, half);
  return dis;
}

Hamiltonian build_hamiltonian(const ModelParams& params, const DisorderRealization& dis) {
  params.validate();
  const int L = params.L;
  if (dis.m.size() != L)
    throw std::invalid_argument("disorder length " + std::to_string(dis.m.size()) +
                                " does not match L = " + std::to_string(L));
  Hamiltonian h;
  h.params = params;
  h.H = MatrixR::Zero(L, L);
  const double jl = params.hop_left();
  const double jr = params.hop_right();
  for (int i = 0; i + 1 < L; ++i) {
    h.H(i, i + 1) = jl;
    h.H(i + 1, i) = jr;
  }
  if (params.boundary == Boundary::Periodic) {
    h.H(L - 1, 0) = jl;
    h.H(0, L - 1) = jr;
  }
  for (int i = 0; i < L; ++i) h.H(i, i) = dis.m[i];
  return h;
}

SimilarityData similarity_transform(const ModelParams& params) {
  params.validate();
  if (std::abs(params.gamma) >= std::abs(params.J))
    throw std::domain_error("similarity transform needs |gamma| < |J|");
  SimilarityData s;
  s.r = std::abs((params.J + params.gamma) / (params.J - params.gamma));
  s.Jprime = (params.J >= 0 ? 1.0 : -1.0) *
             std::sqrt(params.J * params.J - params.gamma * params.gamma);
  s.Sdiag.resize(params.L);
  for (int i = 0; i < params.L; ++i) s.Sdiag[i] = std::pow(s.r, 0.5 * (i + 1));
  return s;
}

ModelParams reflect(const ModelParams& params) {
  ModelParams p = params;
  p.gamma = -params.gamma;
  return p;
}

DisorderRealization reflect(const DisorderRealization& dis) {
  DisorderRealization d;
  d.seed = dis.seed;
  d.m = dis.m.reverse();
  return d;
}

}  // namespace nhent
