#include "nhent/reference.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace nhent {

namespace {

// parity of occupied sites strictly below bit `pos`
int jw_sign(std::uint32_t state, int pos) {
  const std::uint32_t below = state & ((1u << pos) - 1u);
  return (std::popcount(below) % 2 == 0) ? 1 : -1;
}

}  // namespace

FockBasis FockBasis::half_filled(int L) {
  if (L < 2 || L % 2 != 0 || L > 30) throw std::invalid_argument("bad L for Fock basis");
  FockBasis b;
  b.L = L;
  b.N = L / 2;
  for (std::uint32_t s = 0; s < (1u << L); ++s)
    if (std::popcount(s) == b.N) b.states.push_back(s);
  return b;
}

int FockBasis::index_of(std::uint32_t state) const {
  auto it = std::lower_bound(states.begin(), states.end(), state);
  if (it == states.end() || *it != state) return -1;
  return static_cast<int>(it - states.begin());
}

MatrixC many_body_matrix(const Hamiltonian& h, const FockBasis& basis) {
  const int L = basis.L;
  const int dim = basis.dim();
  MatrixC M = MatrixC::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) {
    const std::uint32_t s = basis.states[n];
    for (int i = 0; i < L; ++i) {
      if (s & (1u << i)) M(n, n) += h.H(i, i);
      for (int j = 0; j < L; ++j) {
        if (i == j) continue;
        const double amp = h.H(i, j);
        if (amp == 0.0) continue;
        // c_i^+ c_j |s>
        if (!(s & (1u << j)) || (s & (1u << i))) continue;
        const std::uint32_t mid = s & ~(1u << j);
        const int sign = jw_sign(s, j) * jw_sign(mid, i);
        const std::uint32_t t = mid | (1u << i);
        M(basis.index_of(t), n) += sign * amp;
      }
    }
  }
  return M;
}

ManyBodyState brute_force_evolution(const Hamiltonian& h, double t) {
  const int L = h.params.L;
  if (L > 12) throw std::invalid_argument("brute force is limited to L <= 12");

  ManyBodyState st;
  st.basis = FockBasis::half_filled(L);
  const int dim = st.basis.dim();

  // Neel occupation: sites 2, 4, ..., L
  std::uint32_t neel = 0;
  for (int i = 1; i < L; i += 2) neel |= (1u << i);
  VectorC psi0 = VectorC::Zero(dim);
  psi0[st.basis.index_of(neel)] = 1.0;

  const MatrixC M = many_body_matrix(h, st.basis);
  Eigen::ComplexEigenSolver<MatrixC> es(M);
  if (es.info() != Eigen::Success) throw std::runtime_error("sector eigendecomposition failed");

  const VectorC coeff = es.eigenvectors().partialPivLu().solve(psi0);
  // factor out the fastest-growing mode so e^{-i E t} never overflows
  double im_max = 0.0;
  for (int k = 0; k < dim; ++k) im_max = std::max(im_max, es.eigenvalues()[k].imag() * t);
  VectorC psi = VectorC::Zero(dim);
  for (int k = 0; k < dim; ++k) {
    const Complex e = es.eigenvalues()[k];
    const Complex w = std::exp(Complex(e.imag() * t - im_max, -e.real() * t));
    psi += w * coeff[k] * es.eigenvectors().col(k);
  }
  st.amp = psi / psi.norm();
  return st;
}

CorrelationMatrix ManyBodyState::correlation() const {
  const int L = basis.L;
  CorrelationMatrix c;
  c.D = MatrixC::Zero(L, L);
  for (int n = 0; n < basis.dim(); ++n) {
    const std::uint32_t s = basis.states[n];
    const Complex an = amp[n];
    if (an == Complex(0.0, 0.0)) continue;
    for (int j = 0; j < L; ++j) {
      if (!(s & (1u << j))) continue;
      const std::uint32_t mid = s & ~(1u << j);
      for (int i = 0; i < L; ++i) {
        if (mid & (1u << i)) continue;
        const std::uint32_t tgt = mid | (1u << i);
        const int idx = basis.index_of(tgt);
        const int sign = jw_sign(s, j) * jw_sign(mid, i);
        c.D(i, j) += std::conj(amp[idx]) * static_cast<double>(sign) * an;
      }
    }
  }
  return c;
}

double ManyBodyState::entropy(const Subsystem& A) const {
  const int L = basis.L;
  A.validate(L);
  if (A.sites.empty()) throw std::domain_error("entropy of an empty subsystem");
  for (size_t i = 1; i < A.sites.size(); ++i)
    if (A.sites[i] != A.sites[i - 1] + 1)
      throw std::invalid_argument("brute-force entropy supports contiguous subsystems only");
  // For a contiguous block in a number-conserving state the naive amplitude
  // regrouping is exact: the Jordan-Wigner reordering signs cancel pairwise.
  const int a0 = A.sites.front() - 1;
  const int la = static_cast<int>(A.sites.size());
  const std::uint32_t maskA = ((1u << la) - 1u) << a0;
  const int dimA = 1 << la;

  MatrixC rho = MatrixC::Zero(dimA, dimA);
  // group basis states by their environment configuration
  std::vector<int> order(basis.dim());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::uint32_t> env(basis.dim());
  for (int n = 0; n < basis.dim(); ++n) env[n] = basis.states[n] & ~maskA;
  std::sort(order.begin(), order.end(),
            [&env](int a, int b) { return env[a] < env[b]; });
  for (size_t lo = 0; lo < order.size();) {
    size_t hi = lo;
    while (hi < order.size() && env[order[hi]] == env[order[lo]]) ++hi;
    for (size_t p = lo; p < hi; ++p)
      for (size_t q = lo; q < hi; ++q) {
        const std::uint32_t sa = (basis.states[order[p]] & maskA) >> a0;
        const std::uint32_t sb = (basis.states[order[q]] & maskA) >> a0;
        rho(sa, sb) += amp[order[p]] * std::conj(amp[order[q]]);
      }
    lo = hi;
  }

  Eigen::SelfAdjointEigenSolver<MatrixC> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (double p : es.eigenvalues())
    if (p > 1e-14) s -= p * std::log(p);
  return s;
}

CleanPbcState clean_pbc_state(int L) {
  if (L < 4 || L % 2 != 0) throw std::invalid_argument("clean PBC state needs even L >= 4");
  std::vector<int> ns(L);
  std::iota(ns.begin(), ns.end(), -L / 2);  // n = -L/2 .. L/2-1
  // largest gamma sin k for gamma < 0, i.e. most negative sin k first;
  // ties toward negative k
  std::stable_sort(ns.begin(), ns.end(), [L](int a, int b) {
    const double ka = 2.0 * std::numbers::pi * a / L;
    const double kb = 2.0 * std::numbers::pi * b / L;
    const double sa = std::sin(ka), sb = std::sin(kb);
    if (sa != sb) return sa < sb;
    return ka < kb;
  });

  CleanPbcState out;
  out.occupied_momenta.reserve(L / 2);
  for (int i = 0; i < L / 2; ++i)
    out.occupied_momenta.push_back(2.0 * std::numbers::pi * ns[i] / L);
  std::sort(out.occupied_momenta.begin(), out.occupied_momenta.end());

  // Toeplitz kernel D_{mn} = (1/L) sum_occ e^{-i k (m-n)}
  VectorC f = VectorC::Zero(2 * L - 1);  // index d + (L-1), d = m - n
  for (int d = -(L - 1); d <= L - 1; ++d) {
    Complex acc(0.0, 0.0);
    for (double k : out.occupied_momenta) acc += std::exp(Complex(0.0, -k * d));
    f[d + L - 1] = acc / static_cast<double>(L);
  }
  out.D.D.resize(L, L);
  for (int m = 0; m < L; ++m)
    for (int n = 0; n < L; ++n) out.D.D(m, n) = f[(m - n) + L - 1];
  return out;
}

CorrelationMatrix clean_pbc_correlation(int L) { return clean_pbc_state(L).D; }

double gauge_check(const CorrelationMatrix& c) {
  const int L = c.size();
  double worst = 0.0;
  for (int m = 0; m < L; ++m)
    for (int n = 0; n < L; ++n) {
      // Bulk separations only: entries with |m-n| ~ L wrap around the ring
      // and never approach the open-chain kernel.
      if (std::abs(m - n) > L / 4) continue;
      // (U^+ D U)_{mn} = i^{n-m} D_{mn} with 1-based U_{kk} = i^k. Its real
      // part is the Psi_1/Psi_2 long-time-average kernel; the imaginary
      // O(1/L) piece is the filling asymmetry of a single determinant.
      const int ph = ((n - m) % 4 + 4) % 4;
      static const Complex ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
      const Complex rotated = ipow[ph] * c.D(m, n);
      const double analytic =
          (m == n) ? 0.5
                   : std::sin(std::numbers::pi * (m - n) / 2.0) / (std::numbers::pi * (m - n));
      worst = std::max(worst, std::abs(rotated.real() - analytic));
    }
  return worst;
}

}  // namespace nhent
