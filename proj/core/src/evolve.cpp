#include "nhent/evolve.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace nhent {

namespace {
constexpr double kRankTol = 1e-13;   // min |R_kk| before the frame is declared degenerate
constexpr double kOrthoTol = 1e-10;  // orthonormality restored to this after every step
}  // namespace

void Schedule::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("schedule.dt must be > 0");
  if (record_last < 1 || n_steps < record_last)
    throw std::invalid_argument("schedule requires n_steps >= record_last >= 1");
  if (health_stride < 1) throw std::invalid_argument("schedule.health_stride must be >= 1");
}

SlaterFrame init_neel(int L) {
  if (L < 2 || L % 2 != 0) throw std::invalid_argument("Neel state needs even L");
  SlaterFrame f;
  f.Q = MatrixC::Zero(L, L / 2);
  for (int j = 0; j < L / 2; ++j) f.Q(2 * j + 1, j) = 1.0;  // site 2(j+1), 0-based row
  return f;
}

Propagator make_propagator(const Hamiltonian& h, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("propagator dt must be > 0");
  Propagator p;
  p.dt = dt;
  // H is constant in time, so the exponential is computed once per
  // realization. Scaling-and-squaring Pade is used instead of an
  // eigendecomposition: eigenvector matrices of skin-effect Hamiltonians
  // are exponentially ill-conditioned.
  MatrixC A = (Complex(0.0, -dt) * h.H.cast<Complex>()).eval();
  p.P = A.exp();
  return p;
}

SlaterFrame step(const SlaterFrame& frame, const Propagator& prop) {
  const auto L = frame.Q.rows();
  const auto N = frame.Q.cols();
  MatrixC U(L, N);
  U.noalias() = prop.P * frame.Q;

  Eigen::HouseholderQR<MatrixC> qr(U);
  SlaterFrame out;
  out.step_index = frame.step_index + 1;
  out.Q.noalias() = qr.householderQ() * MatrixC::Identity(L, N);
  for (Eigen::Index k = 0; k < N; ++k) {
    const Complex rkk = qr.matrixQR()(k, k);
    const double a = std::abs(rkk);
    if (a < kRankTol)
      throw StabilizationError(out.step_index,
                               "QR stabilization failed, |R_kk| = " + std::to_string(a));
    out.Q.col(k) *= rkk / a;
  }
#ifndef NDEBUG
  assert(orthonormality_error(out) < kOrthoTol);
#endif
  return out;
}

double orthonormality_error(const SlaterFrame& frame) {
  const auto N = frame.Q.cols();
  return (frame.Q.adjoint() * frame.Q - MatrixC::Identity(N, N)).cwiseAbs().maxCoeff();
}

CorrelationMatrix correlation_matrix(const SlaterFrame& frame) {
  CorrelationMatrix c;
  c.D = (frame.Q * frame.Q.adjoint()).transpose();
  return c;
}

namespace {

void run_trajectory(const ModelParams& params, const DisorderRealization& dis,
                    const Schedule& schedule, bool reflect_back,
                    const std::function<void(int, const CorrelationMatrix&)>& record) {
  const Hamiltonian h = build_hamiltonian(params, dis);
  const Propagator prop = make_propagator(h, schedule.dt);

  SlaterFrame frame = init_neel(params.L);
  if (reflect_back) frame.Q = frame.Q.colwise().reverse().eval();

  const int first_recorded = schedule.n_steps - schedule.record_last + 1;
  for (int s = 1; s <= schedule.n_steps; ++s) {
    frame = step(frame, prop);
    const bool audit = (s % schedule.health_stride == 0) || s == schedule.n_steps;
    if (audit) {
      const double err = orthonormality_error(frame);
      if (err > kOrthoTol)
        throw StabilizationError(s, "orthonormality lost, ||Q^+Q - I|| = " + std::to_string(err));
    }
    if (s >= first_recorded) {
      CorrelationMatrix c = correlation_matrix(frame);
      if (reflect_back) c.D = c.D.reverse().eval();
      record(s, c);
    }
  }
}

}  // namespace

void evolve_trajectory(const ModelParams& params, const DisorderRealization& dis,
                       const Schedule& schedule,
                       const std::function<void(int, const CorrelationMatrix&)>& record) {
  params.validate();
  schedule.validate();
  if (params.gamma > 0.0) {
    // Reflected run: H(gamma, m) = R H(-gamma, reverse m) R with R the site
    // reflection, and the Neel frame reflects onto the odd sublattice.
    run_trajectory(reflect(params), reflect(dis), schedule, /*reflect_back=*/true, record);
  } else {
    run_trajectory(params, dis, schedule, /*reflect_back=*/false, record);
  }
}

std::vector<CorrelationMatrix> evolve_trajectory(const ModelParams& params,
                                                 const DisorderRealization& dis,
                                                 const Schedule& schedule) {
  std::vector<CorrelationMatrix> out;
  out.reserve(schedule.record_last);
  evolve_trajectory(params, dis, schedule,
                    [&out](int, const CorrelationMatrix& c) { out.push_back(c); });
  return out;
}

}  // namespace nhent
