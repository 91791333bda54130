#include "nhent/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nhent {

Subsystem Subsystem::range(int first, int last) {
  Subsystem s;
  if (last < first) throw std::invalid_argument("subsystem range is empty");
  s.sites.reserve(last - first + 1);
  for (int i = first; i <= last; ++i) s.sites.push_back(i);
  return s;
}

void Subsystem::validate(int L) const {
  int prev = 0;
  for (int i : sites) {
    if (i < 1 || i > L) throw std::invalid_argument("subsystem site out of range");
    if (i <= prev) throw std::invalid_argument("subsystem sites must be strictly increasing");
    prev = i;
  }
}

Subsystem left_quarter(int L) { return Subsystem::range(1, L / 4); }
Subsystem right_quarter(int L) { return Subsystem::range(3 * L / 4 + 1, L); }

namespace {

double entropy_of_submatrix(const MatrixC& D, const std::vector<int>& sites, double clip) {
  const int n = static_cast<int>(sites.size());
  MatrixC DA(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) DA(a, b) = D(sites[a] - 1, sites[b] - 1);
  // enforce exact Hermiticity before factorizing
  MatrixC DH = 0.5 * (DA + DA.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixC> es(DH, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (double xi : es.eigenvalues()) {
    xi = std::clamp(xi, clip, 1.0 - clip);
    s -= xi * std::log(xi) + (1.0 - xi) * std::log(1.0 - xi);
  }
  return std::max(s, 0.0);
}

}  // namespace

double entanglement_entropy(const CorrelationMatrix& c, const Subsystem& A, double clip) {
  if (A.sites.empty()) throw std::domain_error("entropy of an empty subsystem");
  A.validate(c.size());
  return entropy_of_submatrix(c.D, A.sites, clip);
}

VectorR entropy_profile(const CorrelationMatrix& c, double clip) {
  const int L = c.size();
  VectorR S(L - 1);
  std::vector<int> sites;
  sites.reserve(L - 1);
  for (int l = 1; l <= L - 1; ++l) {
    sites.push_back(l);
    S[l - 1] = entropy_of_submatrix(c.D, sites, clip);
  }
  return S;
}

VectorR density_profile(const CorrelationMatrix& c) {
  return c.D.diagonal().real();
}

double connected_correlation(const CorrelationMatrix& c, int l) {
  const int L = c.size();
  if (l < 1 || L / 2 + l > L)
    throw std::invalid_argument("connected correlation needs 1 <= l <= L/2");
  const Complex d = c.D(L / 2 - 1, L / 2 + l - 1);
  return std::norm(d);
}

double chord_coordinate(int l, int L) {
  if (l < 1 || l > L - 1) throw std::invalid_argument("chord coordinate needs 1 <= l <= L-1");
  return (L / std::numbers::pi) * std::sin(l * std::numbers::pi / L);
}

double mutual_information(const CorrelationMatrix& c, const Subsystem& A,
                          const Subsystem& B, double clip) {
  A.validate(c.size());
  B.validate(c.size());
  std::vector<int> uni;
  uni.reserve(A.sites.size() + B.sites.size());
  std::merge(A.sites.begin(), A.sites.end(), B.sites.begin(), B.sites.end(),
             std::back_inserter(uni));
  for (size_t i = 1; i < uni.size(); ++i)
    if (uni[i] == uni[i - 1]) throw std::invalid_argument("mutual information needs disjoint A, B");
  return entropy_of_submatrix(c.D, A.sites, clip) + entropy_of_submatrix(c.D, B.sites, clip) -
         entropy_of_submatrix(c.D, uni, clip);
}

}  // namespace nhent
