#pragma once

// Explicit matrices for the three physical systems: a single-site digitized
// scalar field, the SU(3) one-plaquette truncation, and N two-flavor
// neutrinos with forward-scattering self-interactions.

#include "aqae/matrix_core.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace aqae {

/// Single-site lambda phi^4 field digitized on n_s uniformly spaced values.
struct ScalarFieldSpec {
  double m0_sq = 1.0;
  double lambda = 0.0;
  double phi_max = 5.0;
  std::size_t n_s = 64;

  void validate() const {
    if (n_s < 2) throw std::invalid_argument("ScalarFieldSpec: n_s must be at least 2");
    if (!(phi_max > 0.0)) throw std::invalid_argument("ScalarFieldSpec: phi_max must be positive");
    if (lambda < 0.0) throw std::invalid_argument("ScalarFieldSpec: lambda must be non-negative");
  }
  double delta_phi() const { return 2.0 * phi_max / static_cast<double>(n_s - 1); }
  double delta_k() const { return 2.0 * std::numbers::pi / (static_cast<double>(n_s) * delta_phi()); }
  double k_max() const { return std::numbers::pi / delta_phi(); }
};

struct FieldGrid {
  std::vector<double> phi;
  std::vector<double> k;
};

/// phi_b = -phi_max + b * dphi; k_g = (g - (n_s-1)/2) * dk.
inline FieldGrid field_grid(const ScalarFieldSpec& spec) {
  spec.validate();
  FieldGrid g;
  g.phi.resize(spec.n_s);
  g.k.resize(spec.n_s);
  const double dphi = spec.delta_phi();
  const double dk = spec.delta_k();
  const double mid = 0.5 * static_cast<double>(spec.n_s - 1);
  for (std::size_t b = 0; b < spec.n_s; ++b) {
    g.phi[b] = -spec.phi_max + dphi * static_cast<double>(b);
    g.k[b] = (static_cast<double>(b) - mid) * dk;
  }
  // Pin the reflection symmetry exactly: phi_b == -phi_{n-1-b}.
  for (std::size_t b = 0; b < spec.n_s / 2; ++b) {
    g.phi[spec.n_s - 1 - b] = -g.phi[b];
    g.k[spec.n_s - 1 - b] = -g.k[b];
  }
  if (spec.n_s % 2 == 1) {
    g.phi[spec.n_s / 2] = 0.0;
    g.k[spec.n_s / 2] = 0.0;
  }
  return g;
}

/// Conjugate-momentum operator squared in field space, F diag(k^2) F^dagger
/// with F_{bg} = exp(i phi_b k_g) / sqrt(n_s). The imaginary part vanishes for
/// the symmetric grids built by field_grid and is checked.
inline SymMatrix momentum_squared(const ScalarFieldSpec& spec) {
  const auto g = field_grid(spec);
  const auto n = static_cast<Eigen::Index>(spec.n_s);
  Eigen::MatrixXcd f(n, n);
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index c = 0; c < n; ++c)
      f(b, c) = std::exp(cplx(0.0, g.phi[static_cast<std::size_t>(b)] * g.k[static_cast<std::size_t>(c)])) /
                std::sqrt(static_cast<double>(n));
  Eigen::VectorXd k2(n);
  for (Eigen::Index c = 0; c < n; ++c) k2(c) = g.k[static_cast<std::size_t>(c)] * g.k[static_cast<std::size_t>(c)];
  const Eigen::MatrixXcd pi2 = f * k2.asDiagonal() * f.adjoint();
  const double residue = pi2.imag().cwiseAbs().maxCoeff();
  if (residue > 1e-12 * std::max(1.0, k2.maxCoeff()))
    throw std::runtime_error("momentum_squared: imaginary residue exceeds tolerance");
  return SymMatrix(Eigen::MatrixXd(pi2.real()));
}

/// H = Pi^2/2 + (m0^2/2) phi^2 + (lambda/4!) phi^4 on the digitized grid.
inline SymMatrix scalar_site_hamiltonian(const ScalarFieldSpec& spec) {
  const auto g = field_grid(spec);
  Eigen::MatrixXd h = 0.5 * momentum_squared(spec).matrix();
  for (std::size_t b = 0; b < spec.n_s; ++b) {
    const double p2 = g.phi[b] * g.phi[b];
    const auto i = static_cast<Eigen::Index>(b);
    h(i, i) += 0.5 * spec.m0_sq * p2 + spec.lambda / 24.0 * p2 * p2;
  }
  return SymMatrix(h);
}

/// Continuum harmonic-oscillator eigenfunction (m0 = 1).
inline double ho_exact(unsigned n, double phi) {
  double norm = std::pow(std::numbers::pi, -0.25);
  for (unsigned k = 1; k <= n; ++k) norm /= std::sqrt(2.0 * k);
  return norm * std::exp(-0.5 * phi * phi) * std::hermite(n, phi);
}

enum class Parity { even, odd };

/// Orthonormal basis of the +1 (even) or -1 (odd) eigenspace of the grid
/// reflection b <-> n-1-b, as columns of an n x n/2 matrix.
inline Eigen::MatrixXd parity_basis(std::size_t n, Parity parity) {
  if (n % 2 != 0 || n < 2) throw std::invalid_argument("parity_basis: grid size must be even");
  const double sign = parity == Parity::even ? 1.0 : -1.0;
  const double s = 1.0 / std::sqrt(2.0);
  const auto half = static_cast<Eigen::Index>(n / 2);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), half);
  // Column c pairs the mirror points nearest the origin first.
  for (Eigen::Index c = 0; c < half; ++c) {
    const Eigen::Index right = half + c;
    const Eigen::Index left = half - 1 - c;
    b(right, c) = s;
    b(left, c) = sign * s;
  }
  return b;
}

/// H restricted to a definite-parity sector of the reflection-symmetric grid.
inline SymMatrix parity_project(const SymMatrix& h, Parity parity) {
  if (h.dim() % 2 != 0) throw std::invalid_argument("parity_project: odd grid size has no half-space split");
  const Eigen::MatrixXd b = parity_basis(h.dim(), parity);
  return SymMatrix(Eigen::MatrixXd(b.transpose() * h.matrix() * b));
}

/// Embeds a half-space vector back onto the full grid.
inline StateVector parity_embed(const StateVector& half, Parity parity) {
  const Eigen::MatrixXd b = parity_basis(2 * half.dim(), parity);
  return StateVector(Eigen::VectorXd(b * half.re()), Eigen::VectorXd(b * half.im()));
}

namespace pauli {
inline Eigen::Matrix2cd I() { return Eigen::Matrix2cd::Identity(); }
inline Eigen::Matrix2cd X() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}
inline Eigen::Matrix2cd Y() {
  Eigen::Matrix2cd m;
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}
inline Eigen::Matrix2cd Z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Product operator with `op` on `site` (0 = most significant) and identity
/// elsewhere, over n qubits.
inline CMatrix on_site(const CMatrix& op, std::size_t site, std::size_t n) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (std::size_t s = 0; s < n; ++s) out = kron(out, s == site ? op : CMatrix(I()));
  return out;
}
} // namespace pauli

/// The SU(3) one-plaquette Hamiltonian in the color-parity basis truncated to
/// {1, 3+, 6+, 8} = {|00>, |01>, |10>, |11>}.
struct PlaquetteHamiltonian {
  SymMatrix full;
  SymMatrix electric;
};

inline PlaquetteHamiltonian su3_plaquette_hamiltonian(double g) {
  if (g == 0.0 || !std::isfinite(g)) throw std::invalid_argument("su3_plaquette_hamiltonian: coupling must be non-zero");
  using namespace pauli;
  const CMatrix i2 = I(), x = X(), y = Y(), z = Z();
  const double g2 = g * g;
  const CMatrix electric =
      g2 * (23.0 / 6.0 * kron(i2, i2) - 2.5 * kron(z, i2) - 0.5 * kron(i2, z) - 5.0 / 6.0 * kron(z, z));
  const double r2 = std::sqrt(2.0);
  const CMatrix bracket = r2 * kron(i2, x) + r2 * kron(x, 0.5 * (i2 - z)) + 0.5 * kron(x, x) + 0.5 * kron(y, y) +
                          0.25 * kron(i2 + z, i2 - z) - 6.0 * kron(i2, i2);
  const CMatrix magnetic = -1.0 / (2.0 * g2) * bracket;
  return {SymMatrix(Eigen::MatrixXd((electric + magnetic).real())), SymMatrix(Eigen::MatrixXd(electric.real()))};
}

/// Two-flavor neutrino beam on N sites.
struct NeutrinoSpec {
  std::size_t n_sites = 4;
  double theta_v = 0.195;
  double zeta = 0.9;
  double kappa = 1.0;
  /// Per-site one-body strengths; empty selects the monochromatic beam
  /// Delta_i = 2 kappa.
  std::vector<double> delta;

  void validate() const {
    if (n_sites < 2) throw std::invalid_argument("NeutrinoSpec: need at least two sites");
    if (!(zeta > -1.0 && zeta <= 1.0)) throw std::invalid_argument("NeutrinoSpec: zeta must lie in (-1, 1]");
    if (!delta.empty() && delta.size() != n_sites)
      throw std::invalid_argument("NeutrinoSpec: delta must have one entry per site");
  }
  double delta_at(std::size_t i) const { return delta.empty() ? 2.0 * kappa : delta[i]; }
  /// theta_ij = arccos(zeta) |i - j| / (N - 1).
  double theta(std::size_t i, std::size_t j) const {
    const double d = i > j ? static_cast<double>(i - j) : static_cast<double>(j - i);
    return std::acos(zeta) * d / static_cast<double>(n_sites - 1);
  }
};

inline SymMatrix neutrino_hamiltonian(const NeutrinoSpec& spec) {
  spec.validate();
  using namespace pauli;
  const std::size_t n = spec.n_sites;
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  CMatrix h = CMatrix::Zero(dim, dim);
  const double c2 = std::cos(2.0 * spec.theta_v), s2 = std::sin(2.0 * spec.theta_v);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = spec.delta_at(i);
    h += 0.5 * on_site(CMatrix(-d * c2 * Z() + d * s2 * X()), i, n);
  }
  const CMatrix paulis[3] = {X(), Y(), Z()};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = spec.kappa * (1.0 - std::cos(spec.theta(i, j)));
      for (const auto& p : paulis) h += w * on_site(p, i, n) * on_site(p, j, n);
    }
  if (h.imag().cwiseAbs().maxCoeff() > 1e-12)
    throw std::runtime_error("neutrino_hamiltonian: unexpected imaginary part");
  return SymMatrix(Eigen::MatrixXd(h.real()));
}

/// Computational basis state for a flavor pattern: true = nu_e (sigma^z = +1,
/// bit 0), false = nu_mu (bit 1). Site 0 is the most significant qubit.
inline StateVector flavor_state(const std::vector<bool>& electron_flavor) {
  const std::size_t n = electron_flavor.size();
  std::size_t index = 0;
  for (std::size_t s = 0; s < n; ++s)
    if (!electron_flavor[s]) index |= std::size_t{1} << (n - 1 - s);
  return StateVector::basis(std::size_t{1} << n, index);
}

} // namespace aqae
