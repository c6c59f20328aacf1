#pragma once

// Dense real-symmetric / complex-Hermitian kernels and the exact
// diagonalization oracle used to validate every annealing result.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace aqae {

using cplx = std::complex<double>;
/// General dense complex matrix (propagators, products).
using CMatrix = Eigen::MatrixXcd;

/// Tolerances used across the matrix kernels. Callers may override per call
/// where an overload takes a tolerance.
namespace tol {
inline constexpr double hermitian = 1e-12;
inline constexpr double unitary = 1e-10;
inline constexpr double normalized = 1e-12;
} // namespace tol

/// Real symmetric matrix. Construction symmetrizes, so entries(i,j) ==
/// entries(j,i) holds bit for bit.
class SymMatrix {
public:
  SymMatrix() = default;

  explicit SymMatrix(const Eigen::MatrixXd& m) : m_(m) {
    if (m.rows() != m.cols() || m.rows() < 1)
      throw std::invalid_argument("SymMatrix: matrix must be square and non-empty");
    if (!m.allFinite())
      throw std::invalid_argument("SymMatrix: non-finite entries");
    for (Eigen::Index i = 0; i < m_.rows(); ++i)
      for (Eigen::Index j = i + 1; j < m_.cols(); ++j) {
        const double v = 0.5 * (m_(i, j) + m_(j, i));
        m_(i, j) = v;
        m_(j, i) = v;
      }
  }

  static SymMatrix identity(std::size_t n) {
    return SymMatrix(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                               static_cast<Eigen::Index>(n)));
  }
  static SymMatrix diagonal(const Eigen::VectorXd& d) { return SymMatrix(Eigen::MatrixXd(d.asDiagonal())); }

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& matrix() const { return m_; }

  /// Returns H - shift * I.
  SymMatrix shifted(double shift) const {
    SymMatrix out = *this;
    out.m_.diagonal().array() -= shift;
    return out;
  }

  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    return SymMatrix(Eigen::MatrixXd(a.m_ + b.m_));
  }
  friend SymMatrix operator*(double s, const SymMatrix& a) { return SymMatrix(Eigen::MatrixXd(s * a.m_)); }

private:
  Eigen::MatrixXd m_;
};

/// Complex Hermitian matrix held as a symmetric real part and an
/// antisymmetric imaginary part.
class HermMatrix {
public:
  HermMatrix() = default;

  /// Validates Hermiticity within `tolerance * max(1, max|entry|)` and then
  /// projects exactly onto the Hermitian subspace.
  HermMatrix(const Eigen::MatrixXd& re, const Eigen::MatrixXd& im, double tolerance = tol::hermitian)
      : re_(re), im_(im) {
    if (re.rows() != re.cols() || re.rows() < 1 || im.rows() != re.rows() || im.cols() != re.cols())
      throw std::invalid_argument("HermMatrix: parts must be square, non-empty and of equal size");
    if (!re.allFinite() || !im.allFinite())
      throw std::invalid_argument("HermMatrix: non-finite entries");
    const double scale = std::max({1.0, re.cwiseAbs().maxCoeff(), im.cwiseAbs().maxCoeff()});
    const double re_asym = (re - re.transpose()).cwiseAbs().maxCoeff();
    const double im_sym = (im + im.transpose()).cwiseAbs().maxCoeff();
    if (re_asym > tolerance * scale || im_sym > tolerance * scale)
      throw std::invalid_argument("HermMatrix: matrix is not Hermitian");
    for (Eigen::Index i = 0; i < re_.rows(); ++i) {
      im_(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < re_.cols(); ++j) {
        const double r = 0.5 * (re_(i, j) + re_(j, i));
        const double s = 0.5 * (im_(i, j) - im_(j, i));
        re_(i, j) = re_(j, i) = r;
        im_(i, j) = s;
        im_(j, i) = -s;
      }
    }
  }

  explicit HermMatrix(const Eigen::MatrixXcd& m, double tolerance = tol::hermitian)
      : HermMatrix(Eigen::MatrixXd(m.real()), Eigen::MatrixXd(m.imag()), tolerance) {}

  explicit HermMatrix(const SymMatrix& s)
      : re_(s.matrix()), im_(Eigen::MatrixXd::Zero(s.matrix().rows(), s.matrix().cols())) {}

  std::size_t dim() const { return static_cast<std::size_t>(re_.rows()); }
  const Eigen::MatrixXd& re() const { return re_; }
  const Eigen::MatrixXd& im() const { return im_; }
  Eigen::MatrixXcd complex() const {
    Eigen::MatrixXcd m(re_.rows(), re_.cols());
    m.real() = re_;
    m.imag() = im_;
    return m;
  }
  HermMatrix shifted(double shift) const {
    HermMatrix out = *this;
    out.re_.diagonal().array() -= shift;
    return out;
  }

private:
  Eigen::MatrixXd re_;
  Eigen::MatrixXd im_;
};

/// Complex coefficient vector over a finite basis; real problems keep im == 0.
class StateVector {
public:
  StateVector() = default;
  explicit StateVector(std::size_t n)
      : re_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
        im_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))) {}
  explicit StateVector(Eigen::VectorXd re) : re_(std::move(re)), im_(Eigen::VectorXd::Zero(re_.size())) {}
  StateVector(Eigen::VectorXd re, Eigen::VectorXd im) : re_(std::move(re)), im_(std::move(im)) {
    if (re_.size() != im_.size()) throw std::invalid_argument("StateVector: re/im length mismatch");
  }
  explicit StateVector(const Eigen::VectorXcd& v) : re_(v.real()), im_(v.imag()) {}
  /// Any fixed-size or expression column vector, real or complex.
  template <class Derived>
  explicit StateVector(const Eigen::MatrixBase<Derived>& v)
      : re_(v.real().template cast<double>()), im_(v.imag().template cast<double>()) {
    static_assert(Derived::ColsAtCompileTime == 1, "StateVector: expected a column vector");
  }

  static StateVector basis(std::size_t n, std::size_t k) {
    StateVector s(n);
    s.re_(static_cast<Eigen::Index>(k)) = 1.0;
    return s;
  }

  std::size_t dim() const { return static_cast<std::size_t>(re_.size()); }
  const Eigen::VectorXd& re() const { return re_; }
  const Eigen::VectorXd& im() const { return im_; }
  Eigen::VectorXd& re() { return re_; }
  Eigen::VectorXd& im() { return im_; }
  cplx operator[](std::size_t k) const {
    const auto i = static_cast<Eigen::Index>(k);
    return {re_(i), im_(i)};
  }
  Eigen::VectorXcd complex() const {
    Eigen::VectorXcd v(re_.size());
    v.real() = re_;
    v.imag() = im_;
    return v;
  }
  bool is_real() const { return im_.size() == 0 || im_.cwiseAbs().maxCoeff() == 0.0; }

  double norm() const { return std::sqrt(re_.squaredNorm() + im_.squaredNorm()); }

  StateVector normalized() const {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("StateVector: cannot normalize a zero vector");
    return StateVector(Eigen::VectorXd(re_ / n), Eigen::VectorXd(im_ / n));
  }

  bool is_normalized(double tolerance = tol::normalized) const { return std::abs(norm() - 1.0) <= tolerance; }

  /// Multiplies by the unit phase that makes the largest-magnitude component
  /// real and positive (first index wins ties).
  StateVector phase_aligned() const {
    Eigen::Index best = 0;
    double best_mag = -1.0;
    for (Eigen::Index i = 0; i < re_.size(); ++i) {
      const double mag = std::hypot(re_(i), im_(i));
      if (mag > best_mag * (1.0 + 1e-12)) {
        best_mag = mag;
        best = i;
      }
    }
    if (best_mag <= 0.0) return *this;
    const cplx phase = std::conj(cplx(re_(best), im_(best))) / best_mag;
    return StateVector(Eigen::VectorXcd(complex() * phase));
  }

private:
  Eigen::VectorXd re_;
  Eigen::VectorXd im_;
};

/// <a|b> with the first argument conjugated.
inline cplx inner(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("inner: dimension mismatch");
  return {a.re().dot(b.re()) + a.im().dot(b.im()), a.re().dot(b.im()) - a.im().dot(b.re())};
}

struct RealEigenSystem {
  Eigen::VectorXd values;  // ascending
  Eigen::MatrixXd vectors; // columns
};

struct ComplexEigenSystem {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

inline RealEigenSystem eigh(const SymMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.matrix());
  if (es.info() != Eigen::Success) throw std::runtime_error("eigh: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline ComplexEigenSystem eigh(const HermMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.complex());
  if (es.info() != Eigen::Success) throw std::runtime_error("eigh: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline Eigen::VectorXd eigenvalues(const SymMatrix& h) { return eigh(h).values; }
inline Eigen::VectorXd eigenvalues(const HermMatrix& h) { return eigh(h).values; }

/// U = exp(-i t H), computed as V exp(-i t lambda) V^dagger.
inline CMatrix expm_unitary(const HermMatrix& h, double t) {
  const auto es = eigh(h);
  const Eigen::VectorXcd phases =
      es.values.unaryExpr([t](double lambda) { return std::exp(cplx(0.0, -t * lambda)); });
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

inline CMatrix expm_unitary(const SymMatrix& h, double t) { return expm_unitary(HermMatrix(h), t); }

inline double unitarity_defect(const CMatrix& u) {
  return (u * u.adjoint() - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

/// rho = |psi><psi| for a normalized psi.
inline HermMatrix density_matrix(const StateVector& psi) {
  const double n = psi.norm();
  if (!(n > 0.0)) throw std::invalid_argument("density_matrix: zero-norm state");
  if (std::abs(n - 1.0) > 1e-8) throw std::invalid_argument("density_matrix: state is not normalized");
  const Eigen::VectorXcd v = psi.complex();
  return HermMatrix(CMatrix(v * v.adjoint()));
}

namespace detail {
inline std::size_t qubit_count(std::size_t dim, const char* who) {
  if (dim == 0 || (dim & (dim - 1)) != 0) throw std::invalid_argument(std::string(who) + ": dimension is not a power of two");
  std::size_t n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  return n;
}
} // namespace detail

/// Reduced density matrix over the kept sites. Sites are 0-based with site 0
/// the most significant qubit of the Kronecker ordering; the kept sites keep
/// their relative order in the result.
inline HermMatrix partial_trace(const HermMatrix& rho, std::vector<std::size_t> keep) {
  const std::size_t n = detail::qubit_count(rho.dim(), "partial_trace");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  if (keep.back() >= n) throw std::invalid_argument("partial_trace: site index out of range");

  std::vector<std::size_t> traced;
  for (std::size_t s = 0; s < n; ++s)
    if (!std::binary_search(keep.begin(), keep.end(), s)) traced.push_back(s);

  const auto bit_of = [n](std::size_t site) { return std::size_t{1} << (n - 1 - site); };
  const auto scatter = [&](std::size_t value, const std::vector<std::size_t>& sites) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < sites.size(); ++k)
      if (value & (std::size_t{1} << (sites.size() - 1 - k))) idx |= bit_of(sites[k]);
    return idx;
  };

  const std::size_t dk = std::size_t{1} << keep.size();
  const std::size_t dt = std::size_t{1} << traced.size();
  const CMatrix full = rho.complex();
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  for (std::size_t a = 0; a < dk; ++a)
    for (std::size_t b = 0; b < dk; ++b) {
      cplx acc{0.0, 0.0};
      const std::size_t ia = scatter(a, keep), ib = scatter(b, keep);
      for (std::size_t e = 0; e < dt; ++e) {
        const std::size_t ie = scatter(e, traced);
        acc += full(static_cast<Eigen::Index>(ia | ie), static_cast<Eigen::Index>(ib | ie));
      }
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = acc;
    }
  return HermMatrix(out, 1e-10);
}

/// Partial transpose of a two-qubit operator on subsystem 0 or 1.
inline HermMatrix partial_transpose(const HermMatrix& rho, int subsystem) {
  if (rho.dim() != 4) throw std::invalid_argument("partial_transpose: expected a two-qubit (4x4) matrix");
  if (subsystem != 0 && subsystem != 1) throw std::invalid_argument("partial_transpose: subsystem must be 0 or 1");
  const CMatrix m = rho.complex();
  CMatrix out(4, 4);
  for (int a1 = 0; a1 < 2; ++a1)
    for (int a2 = 0; a2 < 2; ++a2)
      for (int b1 = 0; b1 < 2; ++b1)
        for (int b2 = 0; b2 < 2; ++b2) {
          int r1 = a1, c1 = b1, r2 = a2, c2 = b2;
          if (subsystem == 0) std::swap(r1, c1);
          else std::swap(r2, c2);
          out(2 * a1 + a2, 2 * b1 + b2) = m(2 * r1 + r2, 2 * c1 + c2);
        }
  return HermMatrix(out);
}

/// Sum of singular values; for Hermitian input this is sum |lambda_k|.
inline double trace_norm(const HermMatrix& m) { return eigh(m).values.cwiseAbs().sum(); }

inline cplx trace(const HermMatrix& m) { return {m.re().trace(), 0.0}; }

} // namespace aqae
