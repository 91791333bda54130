#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "nhent/model.hpp"
#include "nhent/rng.hpp"

using namespace nhent;

namespace {

DisorderRealization zeros(int L) {
  DisorderRealization d;
  d.m = VectorR::Zero(L);
  return d;
}

std::vector<double> sorted_real_spectrum(const MatrixR& H) {
  Eigen::EigenSolver<MatrixR> es(H);
  std::vector<double> ev;
  for (int i = 0; i < H.rows(); ++i) {
    REQUIRE(std::abs(es.eigenvalues()[i].imag()) < 1e-8);
    ev.push_back(es.eigenvalues()[i].real());
  }
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace

TEST_CASE("clean OBC Hamiltonian is tridiagonal with J_L = J_R = -1/2") {
  ModelParams p{1.0, 0.0, 0.0, 4, Boundary::Open};
  const Hamiltonian h = build_hamiltonian(p, zeros(4));
  for (int i = 0; i < 4; ++i) CHECK(h.H(i, i) == 0.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(h.H(i, i + 1) == doctest::Approx(-0.5));
    CHECK(h.H(i + 1, i) == doctest::Approx(-0.5));
  }
  CHECK(h.H(0, 3) == 0.0);
  CHECK(h.H(3, 0) == 0.0);
}

TEST_CASE("asymmetric hopping lands on the right off-diagonals") {
  ModelParams p{1.0, -0.5, 0.0, 4, Boundary::Open};
  const Hamiltonian h = build_hamiltonian(p, zeros(4));
  for (int i = 0; i < 3; ++i) {
    CHECK(h.H(i, i + 1) == doctest::Approx(-0.75));  // J_L
    CHECK(h.H(i + 1, i) == doctest::Approx(-0.25));  // J_R
  }
}

TEST_CASE("clean PBC spectrum matches the Bloch dispersion") {
  const int L = 8;
  ModelParams p{1.0, -0.5, 0.0, L, Boundary::Periodic};
  const Hamiltonian h = build_hamiltonian(p, zeros(L));
  Eigen::EigenSolver<MatrixR> es(h.H);

  std::vector<Complex> expected, got;
  for (int n = -L / 2; n < L / 2; ++n) {
    const double k = 2.0 * std::numbers::pi * n / L;
    expected.emplace_back(-std::cos(k), -0.5 * std::sin(k));
  }
  for (int i = 0; i < L; ++i) got.push_back(es.eigenvalues()[i]);
  auto cmp = [](const Complex& a, const Complex& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  };
  std::sort(expected.begin(), expected.end(), cmp);
  std::sort(got.begin(), got.end(), cmp);
  for (int i = 0; i < L; ++i) CHECK(std::abs(expected[i] - got[i]) < 1e-12);
}

TEST_CASE("structural nonzero counts: 3L-2 open, 3L periodic") {
  ModelParams p{1.0, -0.5, 2.0, 16, Boundary::Open};
  const auto dis = sample_disorder(p, 5);
  const Hamiltonian ho = build_hamiltonian(p, dis);
  p.boundary = Boundary::Periodic;
  const Hamiltonian hp = build_hamiltonian(p, dis);
  CHECK((ho.H.array() != 0.0).count() == 3 * 16 - 2);
  CHECK((hp.H.array() != 0.0).count() == 3 * 16);
  // PBC differs from OBC in exactly the two wrap entries
  CHECK(((hp.H - ho.H).array() != 0.0).count() == 2);
}

TEST_CASE("trace identity: Tr H equals the summed disorder") {
  ModelParams p{1.0, -0.3, 3.0, 32, Boundary::Open};
  const auto dis = sample_disorder(p, 11);
  const Hamiltonian h = build_hamiltonian(p, dis);
  CHECK(h.H.trace() == doctest::Approx(dis.m.sum()).epsilon(1e-14));
}

TEST_CASE("dimension and parity preconditions are rejected") {
  ModelParams p{1.0, 0.0, 1.0, 7, Boundary::Open};
  CHECK_THROWS_AS(sample_disorder(p, 1), std::invalid_argument);
  p.L = 8;
  DisorderRealization bad = zeros(6);
  CHECK_THROWS_AS(build_hamiltonian(p, bad), std::invalid_argument);
}

TEST_CASE("disorder: W=0 degenerates to zero, entries stay in range") {
  ModelParams p{1.0, 0.0, 0.0, 64, Boundary::Open};
  CHECK(sample_disorder(p, 3).m.cwiseAbs().maxCoeff() == 0.0);
  p.W = 3.0;
  const auto dis = sample_disorder(p, 3);
  CHECK(dis.m.minCoeff() >= -1.5);
  CHECK(dis.m.maxCoeff() <= 1.5);
}

TEST_CASE("disorder moments match the uniform law at W=4") {
  ModelParams p{1.0, 0.0, 4.0, 100000, Boundary::Open};
  p.L = 100000;
  const auto dis = sample_disorder(p, 2024);
  const double mean = dis.m.mean();
  const double var = (dis.m.array() - mean).square().sum() / (p.L - 1);
  CHECK(std::abs(mean) < 0.02);
  CHECK(var > 1.30);
  CHECK(var < 1.37);  // target W^2/12 = 4/3
}

TEST_CASE("disorder is a pure function of (seed, params)") {
  ModelParams p{1.0, 0.0, 2.0, 64, Boundary::Open};
  const auto a = sample_disorder(p, 77);
  const auto b = sample_disorder(p, 77);
  CHECK((a.m - b.m).cwiseAbs().maxCoeff() == 0.0);
  const auto c = sample_disorder(p, 78);
  CHECK((a.m - c.m).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("similarity transform: Hermitian limit and direct evaluation") {
  ModelParams p{1.0, 0.0, 0.0, 8, Boundary::Open};
  const auto hermitian = similarity_transform(p);
  CHECK(hermitian.r == doctest::Approx(1.0));
  CHECK(hermitian.Jprime == doctest::Approx(1.0));
  CHECK(hermitian.Sdiag.minCoeff() == doctest::Approx(1.0));
  CHECK(hermitian.Sdiag.maxCoeff() == doctest::Approx(1.0));

  p.gamma = -0.5;
  const auto skin = similarity_transform(p);
  CHECK(skin.r == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(skin.Jprime == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
  CHECK(skin.Sdiag[0] == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-12));

  p.gamma = 1.0;
  CHECK_THROWS_AS(similarity_transform(p), std::domain_error);
}

TEST_CASE("OBC spectra of H and H' agree for the same disorder") {
  ModelParams p{1.0, -0.5, 2.0, 32, Boundary::Open};
  const auto dis = sample_disorder(p, 31);
  const auto sim = similarity_transform(p);

  ModelParams ph = p;
  ph.J = sim.Jprime;
  ph.gamma = 0.0;
  const auto ev = sorted_real_spectrum(build_hamiltonian(p, dis).H);
  const auto evh = sorted_real_spectrum(build_hamiltonian(ph, dis).H);
  for (size_t i = 0; i < ev.size(); ++i) CHECK(ev[i] == doctest::Approx(evh[i]).epsilon(1e-8));

  // and explicitly through S^{-1} H S
  const MatrixR S = sim.Sdiag.asDiagonal();
  const MatrixR Hp = S.inverse() * build_hamiltonian(p, dis).H * S;
  CHECK((Hp - build_hamiltonian(ph, dis).H).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("reflection swaps the hopping asymmetry and reverses disorder") {
  ModelParams p{1.0, -0.5, 2.0, 8, Boundary::Periodic};
  const auto dis = sample_disorder(p, 4);
  const ModelParams pr = reflect(p);
  const DisorderRealization disr = reflect(dis);
  CHECK(pr.gamma == 0.5);
  CHECK(disr.m[0] == dis.m[7]);

  // H(gamma, m) = R H(-gamma, reverse m) R with R the site reflection
  const MatrixR H = build_hamiltonian(p, dis).H;
  const MatrixR Hr = build_hamiltonian(pr, disr).H;
  MatrixR R = MatrixR::Zero(8, 8);
  for (int i = 0; i < 8; ++i) R(i, 7 - i) = 1.0;
  CHECK((H - R * Hr * R).cwiseAbs().maxCoeff() < 1e-15);
}
