#include "aqae/matrix_core.hpp"
#include "aqae/model_hamiltonians.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

using namespace aqae;
using Catch::Matchers::WithinAbs;

namespace {

HermMatrix random_hermitian(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = cplx(g(rng), g(rng));
  return HermMatrix(CMatrix(0.5 * (a + a.adjoint())));
}

StateVector random_state(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(g(rng), g(rng));
  return StateVector(v).normalized();
}

// Independent oracle: truncated Taylor series of exp(-i t H).
CMatrix taylor_expm(const HermMatrix& h, double t, int terms) {
  const CMatrix a = cplx(0.0, -t) * h.complex();
  CMatrix term = CMatrix::Identity(a.rows(), a.cols());
  CMatrix sum = term;
  for (int k = 1; k <= terms; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) { return pauli::kron(a, b); }

} // namespace

TEST_CASE("SymMatrix validates and symmetrizes its input", "[matrix_core]") {
  CHECK_THROWS_AS(SymMatrix(Eigen::MatrixXd(2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(SymMatrix(Eigen::MatrixXd(0, 0)), std::invalid_argument);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(SymMatrix(bad), std::invalid_argument);

  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 2.0 + 1e-15, 3.0;
  const SymMatrix s(m);
  CHECK(s(0, 1) == s(1, 0));
  CHECK(s.shifted(1.0)(0, 0) == 0.0);
  CHECK(s.shifted(1.0)(0, 1) == s(0, 1));
}

TEST_CASE("HermMatrix rejects non-Hermitian input", "[matrix_core]") {
  Eigen::MatrixXd re = Eigen::MatrixXd::Identity(2, 2), im = Eigen::MatrixXd::Zero(2, 2);
  im(0, 1) = 0.5;
  im(1, 0) = -0.5;
  CHECK_NOTHROW(HermMatrix(re, im));
  im(1, 0) = 0.5; // symmetric imaginary part is not Hermitian
  CHECK_THROWS_AS(HermMatrix(re, im), std::invalid_argument);
  re(0, 1) = 1.0; // asymmetric real part
  im.setZero();
  CHECK_THROWS_AS(HermMatrix(re, im), std::invalid_argument);
}

TEST_CASE("eigh on Pauli-Z and on random Hermitian matrices", "[matrix_core]") {
  const SymMatrix z = SymMatrix::diagonal(Eigen::Vector2d(1.0, -1.0));
  const auto e = eigh(z);
  CHECK(e.values(0) == -1.0);
  CHECK(e.values(1) == 1.0);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const HermMatrix h = random_hermitian(6, rng);
    const auto sys = eigh(h);
    const CMatrix hc = h.complex();
    const double scale = hc.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < sys.values.size(); ++k) {
      const double residual = (hc * sys.vectors.col(k) - sys.values(k) * sys.vectors.col(k)).norm();
      CHECK(residual <= 1e-10 * (1.0 + scale * 6));
      if (k > 0) CHECK(sys.values(k) >= sys.values(k - 1));
    }
    const CMatrix gram = sys.vectors.adjoint() * sys.vectors;
    CHECK((gram - CMatrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("expm_unitary agrees with a Taylor-series oracle", "[matrix_core]") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    HermMatrix h = random_hermitian(5, rng);
    // Scale so that ||tH|| <= 5 in the spectral norm.
    const double spec = eigh(h).values.cwiseAbs().maxCoeff();
    const double t = 5.0 / spec;
    const CMatrix u = expm_unitary(h, t);
    const CMatrix oracle = taylor_expm(h, t, 60);
    CHECK((u - oracle).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(unitarity_defect(u) <= 1e-10);
    const StateVector psi = random_state(5, rng);
    CHECK_THAT(StateVector(Eigen::VectorXcd(u * psi.complex())).norm(), WithinAbs(1.0, 1e-10));
  }
  const HermMatrix h = random_hermitian(3, rng);
  CHECK((expm_unitary(h, 0.0) - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("expm of the SU(3) plaquette reproduces the persistence table", "[matrix_core]") {
  const auto pl = su3_plaquette_hamiltonian(1.0);
  const CMatrix u = expm_unitary(pl.full, 0.4);
  CHECK_THAT(std::norm(u(0, 0)), WithinAbs(0.9271, 0.01));
}

TEST_CASE("StateVector normalization, phase alignment and inner product", "[matrix_core]") {
  CHECK_THROWS_AS(StateVector(3).normalized(), std::invalid_argument);
  const StateVector v(Eigen::Vector3d(0.0, -2.0, 1.0), Eigen::Vector3d(0.0, 0.0, 1.0));
  const StateVector a = v.normalized().phase_aligned();
  CHECK(a.is_normalized());
  CHECK(a.re()(1) > 0.0);
  CHECK(a.im()(1) == 0.0);

  // Ties go to the first index.
  const StateVector tie(Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(-1.0, 0.0));
  const StateVector t = tie.phase_aligned();
  CHECK_THAT(t.re()(0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(t.im()(0), WithinAbs(0.0, 1e-15));

  const StateVector x(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 0.0));
  const StateVector y(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 0.0));
  // <x|y> = i, <y|x> = -i: the first argument is conjugated.
  CHECK(inner(x, y) == cplx(0.0, 1.0));
  CHECK(inner(y, x) == cplx(0.0, -1.0));
}

TEST_CASE("density matrices are unit-trace projectors", "[matrix_core]") {
  CHECK_THROWS_AS(density_matrix(StateVector(4)), std::invalid_argument);
  CHECK_THROWS_AS(density_matrix(StateVector(Eigen::Vector2d(2.0, 0.0))), std::invalid_argument);
  const HermMatrix e0 = density_matrix(StateVector::basis(3, 0));
  CHECK(e0.re()(0, 0) == 1.0);
  CHECK(e0.re().sum() == 1.0);

  std::mt19937_64 rng(2);
  const HermMatrix rho = density_matrix(random_state(8, rng));
  const CMatrix r = rho.complex();
  CHECK_THAT(trace(rho).real(), WithinAbs(1.0, 1e-12));
  CHECK((r * r - r).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("partial trace matches a Kronecker-product oracle", "[matrix_core]") {
  CHECK_THROWS_AS(partial_trace(density_matrix(StateVector::basis(6, 0)), {0}), std::invalid_argument);

  // |0>|1>, keep site 1 -> diag(0, 1); keep site 0 -> diag(1, 0).
  const HermMatrix rho01 = density_matrix(StateVector::basis(4, 1));
  CHECK(partial_trace(rho01, {1}).re()(1, 1) == 1.0);
  CHECK(partial_trace(rho01, {0}).re()(0, 0) == 1.0);

  const double s = 1.0 / std::sqrt(2.0);
  const StateVector bell(Eigen::Vector4d(s, 0.0, 0.0, s));
  for (std::size_t site : {0u, 1u}) {
    const HermMatrix r = partial_trace(density_matrix(bell), {site});
    CHECK((r.complex() - 0.5 * CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-15);
  }

  std::mt19937_64 rng(8);
  const StateVector a = random_state(2, rng), b = random_state(2, rng), c = random_state(2, rng);
  const Eigen::VectorXcd abc = pauli::kron(pauli::kron(a.complex(), b.complex()), c.complex());
  const HermMatrix rho = density_matrix(StateVector(abc));
  const CMatrix ra = density_matrix(a).complex(), rc = density_matrix(c).complex();
  const HermMatrix kept = partial_trace(rho, {2, 0});
  CHECK((kept.complex() - kron(ra, rc)).cwiseAbs().maxCoeff() <= 1e-12);

  // Four-site flavor state: every single-site marginal is a pure projector.
  const HermMatrix flavor = density_matrix(flavor_state({true, true, false, false}));
  double total = 0.0;
  for (std::size_t site = 0; site < 4; ++site) {
    const HermMatrix r = partial_trace(flavor, {site});
    CHECK(r.re()(site < 2 ? 0 : 1, site < 2 ? 0 : 1) == 1.0);
    total += trace(r).real();
  }
  CHECK_THAT(total, WithinAbs(4.0, 1e-12));
}

TEST_CASE("partial transpose and trace norm", "[matrix_core]") {
  CHECK_THROWS_AS(partial_transpose(density_matrix(StateVector::basis(8, 0)), 0), std::invalid_argument);
  const double s = 1.0 / std::sqrt(2.0);
  const HermMatrix bell = density_matrix(StateVector(Eigen::Vector4d(s, 0.0, 0.0, s)));
  for (int sub : {0, 1}) {
    const HermMatrix pt = partial_transpose(bell, sub);
    const Eigen::VectorXd ev = eigenvalues(pt);
    CHECK_THAT(ev(0), WithinAbs(-0.5, 1e-12));
    CHECK_THAT(trace_norm(pt), WithinAbs(2.0, 1e-12));
    CHECK_THAT(trace(pt).real(), WithinAbs(1.0, 1e-12));
  }

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const HermMatrix r1 = density_matrix(random_state(2, rng)), r2 = density_matrix(random_state(2, rng));
    const HermMatrix sep(kron(r1.complex(), r2.complex()));
    const HermMatrix pt = partial_transpose(sep, 1);
    CHECK(eigenvalues(pt).minCoeff() >= -1e-12);
    CHECK_THAT(trace_norm(pt), WithinAbs(1.0, 1e-10));
    // Any two-qubit state: trace norm of the partial transpose is at least 1.
    const HermMatrix any = density_matrix(random_state(4, rng));
    CHECK(trace_norm(partial_transpose(any, 0)) >= 1.0 - 1e-10);
  }
  CHECK_THAT(trace_norm(HermMatrix(SymMatrix::diagonal(Eigen::Vector2d(1.0, -1.0)))), WithinAbs(2.0, 1e-15));
  CHECK_THAT(trace_norm(density_matrix(StateVector::basis(4, 2))), WithinAbs(1.0, 1e-12));
}
