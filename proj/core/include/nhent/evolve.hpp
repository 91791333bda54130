#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nhent/model.hpp"
#include "nhent/types.hpp"

namespace nhent {

// L x N matrix with orthonormal columns; the evolving many-body state.
struct SlaterFrame {
  MatrixC Q;
  long step_index = 0;
};

struct Propagator {
  MatrixC P;  // exp(-i H dt)
  double dt = 0.0;
};

// D_ij = <c_i^+ c_j> = (Q Q^+)^T. Hermitian, eigenvalues in [0,1], Tr D = N.
struct CorrelationMatrix {
  MatrixC D;
  int size() const { return static_cast<int>(D.rows()); }
};

struct Schedule {
  double dt = 2.0;
  int n_steps = 1000;
  int record_last = 100;
  // cadence of the orthonormality audit (||Q^+Q - I||_max); min|R_kk| is
  // checked on every step regardless. Debug builds audit every step.
  int health_stride = 50;

  void validate() const;
};

class StabilizationError : public std::runtime_error {
 public:
  StabilizationError(long step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what),
        step_index(step) {}
  long step_index;
};

// Neel frame: column j is the unit vector on site 2j (1-based sites).
SlaterFrame init_neel(int L);

Propagator make_propagator(const Hamiltonian& h, double dt);

// One stabilized step: QR-factor P*Q and fix column phases so diag(R) is
// real-positive (makes trajectories deterministic; QR is unique only up to
// phases). Throws StabilizationError when some |R_kk| < 1e-13.
SlaterFrame step(const SlaterFrame& frame, const Propagator& prop);

// ||Q^+Q - I||_max of a frame.
double orthonormality_error(const SlaterFrame& frame);

CorrelationMatrix correlation_matrix(const SlaterFrame& frame);

// Evolves the Neel state for n_steps and hands D to `record` at each of the
// final record_last steps (step argument counts from 1). gamma > 0 inputs
// run through the reflected gamma < 0 problem and the recorded D is
// reflected back, which is exact (see model.hpp).
void evolve_trajectory(const ModelParams& params, const DisorderRealization& dis,
                       const Schedule& schedule,
                       const std::function<void(int step, const CorrelationMatrix&)>& record);

std::vector<CorrelationMatrix> evolve_trajectory(const ModelParams& params,
                                                 const DisorderRealization& dis,
                                                 const Schedule& schedule);

}  // namespace nhent
