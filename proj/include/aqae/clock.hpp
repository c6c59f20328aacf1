#pragma once

// Feynman-clock embedding of real-time evolution: a Hermitian, positive
// semidefinite operator over compound states sum_t |psi_t>|t> whose null
// vector is the whole discrete history psi_{t+1} = U psi_t with psi_0 = psi_in.

#include "aqae/matrix_core.hpp"
#include "aqae/solver.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace aqae {

struct ClockProblem {
  CMatrix U;        ///< single-step propagator exp(-i dt H)
  std::size_t n_T = 2;
  StateVector psi_in;
  double dt = 0.0;

  void validate() const {
    if (U.rows() == 0 || U.rows() != U.cols()) throw std::invalid_argument("ClockProblem: U must be square and non-empty");
    if (n_T < 2) throw std::invalid_argument("ClockProblem: need at least two time slices");
    if (unitarity_defect(U) > tol::unitary) throw std::invalid_argument("ClockProblem: U is not unitary");
    if (psi_in.dim() != static_cast<std::size_t>(U.rows()))
      throw std::invalid_argument("ClockProblem: input state does not match U");
    if (!psi_in.is_normalized(1e-10)) throw std::invalid_argument("ClockProblem: input state is not normalized");
  }
};

/// Slice-major clock operator: slice t occupies rows t*n .. t*n + n - 1.
///   C = (I - |in><in|) (x) |0><0|
///     + 1/2 sum_t ( |t><t| + |t+1><t+1| - U (x) |t+1><t| - U^dagger (x) |t><t+1| ).
inline HermMatrix build_clock(const ClockProblem& problem) {
  problem.validate();
  const Eigen::Index n = problem.U.rows();
  const Eigen::Index T = static_cast<Eigen::Index>(problem.n_T);
  const CMatrix I = CMatrix::Identity(n, n);
  CMatrix c = CMatrix::Zero(n * T, n * T);
  for (Eigen::Index t = 0; t + 1 < T; ++t) {
    c.block(t * n, t * n, n, n) += 0.5 * I;
    c.block((t + 1) * n, (t + 1) * n, n, n) += 0.5 * I;
    c.block((t + 1) * n, t * n, n, n) -= 0.5 * problem.U;
    c.block(t * n, (t + 1) * n, n, n) -= 0.5 * problem.U.adjoint();
  }
  const Eigen::VectorXcd in = problem.psi_in.complex();
  c.block(0, 0, n, n) += I - in * in.adjoint();
  return HermMatrix(c, 1e-10);
}

/// Splits a compound vector into its n_T slices, each renormalized and phase
/// aligned (largest-magnitude component real and positive).
inline std::vector<StateVector> extract_slices(const StateVector& compound, std::size_t n_T, std::size_t n_s) {
  if (n_T < 1 || n_s < 1) throw std::invalid_argument("extract_slices: need at least one slice of positive size");
  if (compound.dim() != n_T * n_s) throw std::invalid_argument("extract_slices: dimension is not n_T * n_s");
  std::vector<StateVector> out;
  out.reserve(n_T);
  const auto ns = static_cast<Eigen::Index>(n_s);
  for (std::size_t t = 0; t < n_T; ++t) {
    const auto off = static_cast<Eigen::Index>(t) * ns;
    StateVector slice(compound.re().segment(off, ns), compound.im().segment(off, ns));
    if (slice.norm() < 1e-6)
      throw SolverError("extract_slices: slice " + std::to_string(t) + " is numerically zero; the clock solve failed");
    out.push_back(slice.normalized().phase_aligned());
  }
  return out;
}

/// Exact history psi_t = U^t psi_in for t = 0 .. n_T - 1, phase aligned.
inline std::vector<StateVector> exact_history(const CMatrix& U, const StateVector& psi_in, std::size_t n_T) {
  std::vector<StateVector> out;
  Eigen::VectorXcd v = psi_in.complex();
  for (std::size_t t = 0; t < n_T; ++t) {
    out.push_back(StateVector(v).normalized().phase_aligned());
    v = U * v;
  }
  return out;
}

struct ClockSolution {
  std::vector<StateVector> slices; ///< slices of the best run
  std::vector<std::vector<StateVector>> slices_per_run;
  SolveTrace trace; ///< trace of the last pass
  /// Final clock energy of every run, one entry per pass (raw solve first,
  /// then each refinement).
  std::vector<std::vector<double>> pass_energies;
};

inline ClockSolution clock_solution_from(SolveTrace trace, std::size_t n_T, std::size_t n_s) {
  ClockSolution out;
  for (const auto& run : trace.runs) out.slices_per_run.push_back(extract_slices(run.final().wavefunction, n_T, n_s));
  out.slices = out.slices_per_run[trace.best_run()];
  out.trace = std::move(trace);
  return out;
}

/// Builds U = exp(-i dt H), the clock operator, and solves it through the
/// complex QUBO path. The target eigenvalue is exactly zero, so params.eta is
/// normally 0; centers are carried normalized between zoom steps.
/// `refinements` extra passes restart at zoom `refine_z_init`.
inline ClockSolution evolve(const SymMatrix& h_phys, double dt, std::size_t n_T, const StateVector& psi_in,
                            SolveParams params, int refinements = 0, int refine_z_init = 4) {
  ClockProblem problem{expm_unitary(h_phys, dt), n_T, psi_in, dt};
  const HermMatrix c = build_clock(problem);
  params.center_mode = CenterMode::normalized;
  SolveTrace trace = solve_state(c, params);
  std::vector<std::vector<double>> pass_energies{trace.final_energies()};
  for (int k = 0; k < refinements; ++k) {
    SolveParams p = params;
    p.z_init = refine_z_init;
    p.z_max = params.z_max + refine_z_init;
    p.seed = derive_seed(params.seed, 0x7ef10000ULL + static_cast<std::uint64_t>(k));
    trace = refine(c, trace, p);
    pass_energies.push_back(trace.final_energies());
  }
  ClockSolution out = clock_solution_from(std::move(trace), n_T, h_phys.dim());
  out.pass_energies = std::move(pass_energies);
  return out;
}

} // namespace aqae
