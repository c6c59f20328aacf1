#pragma once

// Physical quantities evaluated on exact or annealed states: energies,
// persistence, electric energy, flavor probabilities and entanglement
// measures (logarithms are base 2 throughout).

#include "aqae/matrix_core.hpp"
#include "aqae/model_hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace aqae {

/// Re <psi|H|psi>; the imaginary residue must vanish to 1e-10.
inline double rayleigh(const StateVector& psi, const HermMatrix& h) {
  if (psi.dim() != h.dim()) throw std::invalid_argument("rayleigh: dimension mismatch");
  const Eigen::VectorXcd v = psi.complex();
  const cplx e = v.dot(h.complex() * v); // dot conjugates its first argument
  if (std::abs(e.imag()) > 1e-10 * std::max(1.0, std::abs(e.real())))
    throw std::logic_error("rayleigh: expectation value has an imaginary part");
  return e.real();
}

inline double rayleigh(const StateVector& psi, const SymMatrix& h) {
  if (psi.dim() != h.dim()) throw std::invalid_argument("rayleigh: dimension mismatch");
  return psi.re().dot(h.matrix() * psi.re()) + psi.im().dot(h.matrix() * psi.im());
}

/// |<psi_in|psi_t>|^2.
inline double persistence(const StateVector& psi_t, const StateVector& psi_in) { return std::norm(inner(psi_in, psi_t)); }

inline double electric_energy(const StateVector& psi_t, const SymMatrix& h_electric) { return rayleigh(psi_t, h_electric); }

enum class Flavor { electron, muon };

/// Probability that site i has changed flavor:
/// (1 - sigma^z_i)/2 for an initial nu_e, (1 + sigma^z_i)/2 for an initial nu_mu.
inline double flavor_probability(const StateVector& psi_t, std::size_t site, Flavor initial) {
  const std::size_t n = detail::qubit_count(psi_t.dim(), "flavor_probability");
  if (site >= n) throw std::invalid_argument("flavor_probability: site index out of range");
  const std::size_t bit = std::size_t{1} << (n - 1 - site);
  double p_bit_one = 0.0;
  for (std::size_t b = 0; b < psi_t.dim(); ++b)
    if (b & bit) p_bit_one += std::norm(psi_t[b]);
  const double total = psi_t.norm() * psi_t.norm();
  const double p = initial == Flavor::electron ? p_bit_one : total - p_bit_one;
  return p / total;
}

/// Von Neumann entropy (bits) of the single-site reduced density matrix.
inline double entanglement_entropy(const StateVector& psi_t, std::size_t site) {
  const Eigen::VectorXd lambda = eigh(partial_trace(density_matrix(psi_t), {site})).values;
  double s = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    if (lambda(k) > 1e-14) s -= lambda(k) * std::log2(lambda(k));
  return std::clamp(s, 0.0, 1.0);
}

/// log2 of the trace norm of the partially transposed two-site reduced
/// density matrix; zero when the trace norm does not exceed 1 + 1e-12.
inline double log_negativity(const StateVector& psi_t, std::size_t i, std::size_t j) {
  if (i == j) throw std::invalid_argument("log_negativity: sites must differ");
  const HermMatrix rho = partial_trace(density_matrix(psi_t), {i, j});
  const double tn = trace_norm(partial_transpose(rho, 1));
  return tn <= 1.0 + 1e-12 ? 0.0 : std::log2(tn);
}

/// A time series with an optional 68% band; probabilities are clamped to
/// [0, 1] on output when `probability` is set (values must lie within 1e-9).
struct ObservableSeries {
  std::string label;
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> lo68;
  std::vector<double> hi68;
  bool probability = false;

  void push(double t, double v) { push(t, v, v, v); }
  void push(double t, double v, double lo, double hi) {
    times.push_back(t);
    values.push_back(v);
    lo68.push_back(lo);
    hi68.push_back(hi);
  }

  void validate() const {
    if (values.size() != times.size() || lo68.size() != times.size() || hi68.size() != times.size())
      throw std::invalid_argument("ObservableSeries: column lengths differ");
    if (probability)
      for (double v : values)
        if (v < -1e-9 || v > 1.0 + 1e-9) throw std::invalid_argument("ObservableSeries: probability outside [0, 1]");
  }

  void write_csv(std::ostream& os) const {
    validate();
    os << "t,value,lo68,hi68\n";
    char buf[128];
    auto out = [&](double v) { return probability ? std::clamp(v, 0.0, 1.0) : v; };
    for (std::size_t k = 0; k < times.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", times[k], out(values[k]), out(lo68[k]), out(hi68[k]));
      os << buf;
    }
  }
};

} // namespace aqae
