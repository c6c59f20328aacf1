#pragma once

// Fixed-point QUBO encodings of the eigenvalue objective a^T h a and of the
// complex objective a^dagger C a, with adaptive zoom windows.
//
// Coefficient alpha at zoom z is represented by K bits around a center:
//   a = center - 2^-z q_K + sum_{i<K} q_i 2^(i-K-z),
// so the all-zero bitstring always decodes to the center itself.

#include "aqae/matrix_core.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace aqae {

using Bits = std::vector<std::uint8_t>;

struct Encoding {
  int K = 3;
  int z = 0;
  /// Real problems: one center per coefficient. Complex problems: 2 * dim
  /// entries, (re, im) per coefficient, mirroring the bit layout.
  std::vector<double> centers;

  void validate() const {
    if (K < 1) throw std::invalid_argument("Encoding: K must be at least 1");
    if (z < 0) throw std::invalid_argument("Encoding: zoom level must be non-negative");
  }

  /// Signed weight of bit i (1-based, i = K is the sign bit).
  double weight(int i) const {
    const double w = std::ldexp(1.0, i - K - z);
    return i == K ? -w : w;
  }
};

/// Upper-triangular QUBO: energy(q) = sum_{i<=j} Q_ij q_i q_j.
class QuboInstance {
public:
  QuboInstance() = default;
  explicit QuboInstance(std::size_t n_vars) : n_(n_vars), upper_(n_vars * n_vars, 0.0) {}

  /// Folds a full (not necessarily symmetric) matrix: Q'_ij = Q_ij + Q_ji for
  /// i < j, Q'_ii = Q_ii.
  static QuboInstance from_full(const Eigen::MatrixXd& q) {
    if (q.rows() != q.cols()) throw std::invalid_argument("QuboInstance: matrix must be square");
    QuboInstance out(static_cast<std::size_t>(q.rows()));
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      out.set(static_cast<std::size_t>(i), static_cast<std::size_t>(i), q(i, i));
      for (Eigen::Index j = i + 1; j < q.cols(); ++j)
        out.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j), q(i, j) + q(j, i));
    }
    return out;
  }

  std::size_t n_vars() const { return n_; }
  bool empty() const { return n_ == 0; }

  double operator()(std::size_t i, std::size_t j) const { return i <= j ? upper_[i * n_ + j] : upper_[j * n_ + i]; }
  void set(std::size_t i, std::size_t j, double v) {
    if (i > j) std::swap(i, j);
    if (!std::isfinite(v)) throw std::invalid_argument("QuboInstance: non-finite coefficient");
    upper_[i * n_ + j] = v;
  }
  void add(std::size_t i, std::size_t j, double v) {
    if (i > j) std::swap(i, j);
    set(i, j, upper_[i * n_ + j] + v);
  }

  double energy(const Bits& q) const {
    if (q.size() != n_) throw std::invalid_argument("QuboInstance::energy: bitstring length mismatch");
    double e = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!q[i]) continue;
      const double* row = &upper_[i * n_];
      for (std::size_t j = i; j < n_; ++j)
        if (q[j]) e += row[j];
    }
    return e;
  }

  QuboInstance scaled(double c) const {
    QuboInstance out = *this;
    for (auto& v : out.upper_) v *= c;
    return out;
  }

  /// One `i j value` line per non-zero coefficient, 0-based, i <= j.
  void write_text(std::ostream& os) const {
    char buf[64];
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j) {
        const double v = upper_[i * n_ + j];
        if (v == 0.0) continue;
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << i << ' ' << j << ' ' << buf << '\n';
      }
  }
  std::string to_text() const {
    std::ostringstream os;
    write_text(os);
    return os.str();
  }
  static QuboInstance read_text(std::istream& is, std::size_t n_vars) {
    QuboInstance out(n_vars);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::size_t i = 0, j = 0;
      double v = 0.0;
      if (!(ls >> i >> j >> v)) throw std::invalid_argument("QuboInstance: malformed line '" + line + "'");
      if (i >= n_vars || j >= n_vars) throw std::invalid_argument("QuboInstance: index out of range");
      out.add(i, j, v);
    }
    return out;
  }

private:
  std::size_t n_ = 0;
  std::vector<double> upper_; // row-major n x n, only j >= i used
};

/// Decodes a bitstring at the encoding's zoom level. Complex problems use a
/// 2K-bit block per coefficient: K bits for the real part, then K for the
/// imaginary part.
inline StateVector decode(const Bits& bits, const Encoding& enc, bool complex) {
  enc.validate();
  const std::size_t K = static_cast<std::size_t>(enc.K);
  if (!complex) {
    const std::size_t n = enc.centers.size();
    if (bits.size() != K * n) throw std::invalid_argument("decode: bitstring length does not match K * dim");
    Eigen::VectorXd a(static_cast<Eigen::Index>(n));
    for (std::size_t alpha = 0; alpha < n; ++alpha) {
      double v = enc.centers[alpha];
      for (std::size_t i = 1; i <= K; ++i)
        if (bits[K * alpha + i - 1]) v += enc.weight(static_cast<int>(i));
      a(static_cast<Eigen::Index>(alpha)) = v;
    }
    return StateVector(a);
  }
  if (enc.centers.size() % 2 != 0) throw std::invalid_argument("decode: complex centers need (re, im) pairs");
  const std::size_t n = enc.centers.size() / 2;
  if (bits.size() != 2 * K * n) throw std::invalid_argument("decode: bitstring length does not match 2K * dim");
  Eigen::VectorXd re(static_cast<Eigen::Index>(n)), im(static_cast<Eigen::Index>(n));
  for (std::size_t alpha = 0; alpha < n; ++alpha) {
    double r = enc.centers[2 * alpha], s = enc.centers[2 * alpha + 1];
    for (std::size_t i = 1; i <= K; ++i) {
      const double w = enc.weight(static_cast<int>(i));
      if (bits[2 * K * alpha + i - 1]) r += w;
      if (bits[2 * K * alpha + K + i - 1]) s += w;
    }
    re(static_cast<Eigen::Index>(alpha)) = r;
    im(static_cast<Eigen::Index>(alpha)) = s;
  }
  return StateVector(re, im);
}

/// Centers array for a state: plain coefficients (real) or interleaved
/// (re, im) pairs (complex).
inline std::vector<double> centers_from(const StateVector& v, bool complex) {
  std::vector<double> c;
  c.reserve(complex ? 2 * v.dim() : v.dim());
  for (std::size_t k = 0; k < v.dim(); ++k) {
    c.push_back(v.re()(static_cast<Eigen::Index>(k)));
    if (complex) c.push_back(v.im()(static_cast<Eigen::Index>(k)));
  }
  return c;
}

struct Projection {
  StateVector state;
  double mu = 0.0;
};

/// H + sum_n mu_n |psi_n><psi_n|; states must be real and normalized.
inline SymMatrix project_hamiltonian(const SymMatrix& h, const std::vector<Projection>& projections) {
  Eigen::MatrixXd m = h.matrix();
  for (const auto& p : projections) {
    if (p.state.dim() != h.dim()) throw std::invalid_argument("project_hamiltonian: state dimension mismatch");
    if (std::abs(p.state.norm() - 1.0) > 1e-8) throw std::invalid_argument("project_hamiltonian: state is not normalized");
    if (!p.state.is_real()) throw std::invalid_argument("project_hamiltonian: complex state for a real Hamiltonian");
    m += p.mu * p.state.re() * p.state.re().transpose();
  }
  return SymMatrix(m);
}

inline HermMatrix project_hamiltonian(const HermMatrix& h, const std::vector<Projection>& projections) {
  CMatrix m = h.complex();
  for (const auto& p : projections) {
    if (p.state.dim() != h.dim()) throw std::invalid_argument("project_hamiltonian: state dimension mismatch");
    if (std::abs(p.state.norm() - 1.0) > 1e-8) throw std::invalid_argument("project_hamiltonian: state is not normalized");
    const Eigen::VectorXcd v = p.state.complex();
    m += p.mu * v * v.adjoint();
  }
  return HermMatrix(m, 1e-10);
}

/// QUBO for min a^T h a at the encoding's zoom level, where h is already
/// shifted by eta. energy(q) == F(decode(q)) - F(centers); the constant
/// F(centers) is dropped, so energies are not comparable across zoom levels.
inline QuboInstance build_eigen_qubo(const SymMatrix& h, const Encoding& enc) {
  enc.validate();
  const std::size_t n = h.dim();
  if (enc.centers.size() != n) throw std::invalid_argument("build_eigen_qubo: centers length must equal dim");
  const std::size_t K = static_cast<std::size_t>(enc.K);
  const Eigen::Map<const Eigen::VectorXd> a(enc.centers.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd ha = h.matrix() * a; // h symmetric: sum_g a_g h_gb

  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K * n), static_cast<Eigen::Index>(K * n));
  for (std::size_t alpha = 0; alpha < n; ++alpha)
    for (std::size_t beta = 0; beta < n; ++beta) {
      const double hab = h(alpha, beta);
      for (std::size_t i = 1; i <= K; ++i)
        for (std::size_t j = 1; j <= K; ++j) {
          const auto r = static_cast<Eigen::Index>(K * alpha + i - 1);
          const auto c = static_cast<Eigen::Index>(K * beta + j - 1);
          q(r, c) += enc.weight(static_cast<int>(i)) * enc.weight(static_cast<int>(j)) * hab;
          if (alpha == beta && i == j)
            q(r, c) += 2.0 * enc.weight(static_cast<int>(i)) * ha(static_cast<Eigen::Index>(beta));
        }
    }
  return QuboInstance::from_full(q);
}

/// QUBO for min a^dagger C a with complex a, C = C^Re + i C^Im Hermitian and
/// already shifted by eta. Within each coefficient's 2K block, bits 1..K
/// encode the real part and K+1..2K the imaginary part.
inline QuboInstance build_clock_qubo(const HermMatrix& c, const Encoding& enc) {
  enc.validate();
  const std::size_t n = c.dim();
  if (enc.centers.size() != 2 * n) throw std::invalid_argument("build_clock_qubo: centers length must equal 2 * dim");
  const Eigen::MatrixXd& cre = c.re();
  const Eigen::MatrixXd& cim = c.im();
  if ((cre - cre.transpose()).cwiseAbs().maxCoeff() > tol::hermitian ||
      (cim + cim.transpose()).cwiseAbs().maxCoeff() > tol::hermitian)
    throw std::invalid_argument("build_clock_qubo: operator is not Hermitian");

  const std::size_t K = static_cast<std::size_t>(enc.K);
  Eigen::VectorXd are(static_cast<Eigen::Index>(n)), aim(static_cast<Eigen::Index>(n));
  for (std::size_t g = 0; g < n; ++g) {
    are(static_cast<Eigen::Index>(g)) = enc.centers[2 * g];
    aim(static_cast<Eigen::Index>(g)) = enc.centers[2 * g + 1];
  }
  // sum_g (a^Re_g C^Re_gb + a^Im_g C^Im_gb) and sum_g (a^Im_g C^Re_gb - a^Re_g C^Im_gb)
  const Eigen::VectorXd lin_re = cre.transpose() * are + cim.transpose() * aim;
  const Eigen::VectorXd lin_im = cre.transpose() * aim - cim.transpose() * are;

  const std::size_t block = 2 * K;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(block * n), static_cast<Eigen::Index>(block * n));
  for (std::size_t alpha = 0; alpha < n; ++alpha)
    for (std::size_t beta = 0; beta < n; ++beta) {
      const auto ia = static_cast<Eigen::Index>(alpha), ib = static_cast<Eigen::Index>(beta);
      for (std::size_t i = 1; i <= block; ++i)
        for (std::size_t j = 1; j <= block; ++j) {
          const bool i_re = i <= K, j_re = j <= K;
          const int ii = static_cast<int>(i_re ? i : i - K);
          const int jj = static_cast<int>(j_re ? j : j - K);
          const double ww = enc.weight(ii) * enc.weight(jj);
          double v = 0.0;
          if (i_re && j_re) {
            v = ww * cre(ia, ib);
            if (alpha == beta && i == j) v += 2.0 * enc.weight(ii) * lin_re(ib);
          } else if (i_re && !j_re) {
            v = -ww * cim(ia, ib);
          } else if (!i_re && j_re) {
            v = ww * cim(ia, ib);
          } else {
            v = ww * cre(ia, ib);
            if (alpha == beta && i == j) v += 2.0 * enc.weight(ii) * lin_im(ib);
          }
          q(static_cast<Eigen::Index>(block * alpha + i - 1), static_cast<Eigen::Index>(block * beta + j - 1)) += v;
        }
    }
  return QuboInstance::from_full(q);
}

/// Objective a^T h a (real) or a^dagger C a (complex); used as the oracle for
/// QUBO offset consistency and by the solver.
inline double objective(const SymMatrix& h, const StateVector& a) { return a.re().dot(h.matrix() * a.re()); }
inline double objective(const HermMatrix& c, const StateVector& a) {
  const Eigen::VectorXcd v = a.complex();
  return (v.adjoint() * c.complex() * v)(0, 0).real();
}

} // namespace aqae
