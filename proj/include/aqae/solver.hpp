#pragma once

// Adaptive zoom solver: at each zoom level build the QUBO around the current
// centers, sample it, decode every read, keep the candidate with the lowest
// Rayleigh quotient and use it as the next center. The incumbent (the
// all-zero bitstring, which decodes to the center) is always a candidate, so
// the per-run energy never increases from one zoom step to the next.

#include "aqae/annealer.hpp"
#include "aqae/model_hamiltonians.hpp"
#include "aqae/qubo.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_interp.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace aqae {

/// Raised when the zoom loop cannot continue (every read decoded to the null
/// vector).
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class CenterMode {
  unnormalized, ///< next center = raw decoded coefficients
  normalized    ///< next center = decoded coefficients scaled to unit norm
};

struct SolveParams {
  int K = 3;
  double eta = 0.0;
  std::size_t num_reads = 1000;
  /// Optional per-zoom override of num_reads, indexed by zoom - z_init.
  std::vector<std::size_t> reads_per_zoom;
  int z_init = 0;
  int z_max = 14;
  std::vector<Projection> projections;
  /// Starting centers; empty means all zeros.
  std::vector<double> initial_centers;
  std::uint64_t seed = 1;
  std::size_t runs = 1;
  int sweeps = 1000;
  CenterMode center_mode = CenterMode::unnormalized;
  unsigned threads = 0;

  void validate() const {
    if (K < 1) throw std::invalid_argument("SolveParams: K must be at least 1");
    if (z_init < 0 || z_init > z_max) throw std::invalid_argument("SolveParams: need 0 <= z_init <= z_max");
    if (num_reads < 1) throw std::invalid_argument("SolveParams: num_reads must be at least 1");
    if (runs < 1) throw std::invalid_argument("SolveParams: runs must be at least 1");
    if (sweeps < 1) throw std::invalid_argument("SolveParams: sweeps must be at least 1");
  }
  std::size_t reads_at(int zoom) const {
    const auto k = static_cast<std::size_t>(zoom - z_init);
    return k < reads_per_zoom.size() ? reads_per_zoom[k] : num_reads;
  }
};

struct ZoomRecord {
  int zoom = 0;
  double energy = 0.0;
  StateVector wavefunction;         ///< normalized, phase aligned
  std::vector<double> next_centers; ///< centers handed to the next zoom step
};

struct RunTrace {
  std::vector<ZoomRecord> zooms;
  const ZoomRecord& final() const { return zooms.back(); }
};

struct ZoomStats {
  int zoom = 0;
  double min = 0.0;
  double median = 0.0;
  double p16 = 0.0;
  double p84 = 0.0;
};

/// Nearest-rank percentile: the value at 1-based rank ceil(p * N) of the
/// sorted sample (so the median of 1..100 is 50).
inline double nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("nearest_rank: empty sample");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

/// Order statistics per zoom step across runs. `values[run][k]` is the k-th
/// zoom entry of a run; all runs must have the same length.
inline std::vector<ZoomStats> run_statistics(const std::vector<std::vector<double>>& values,
                                             const std::vector<int>& zooms) {
  if (values.empty()) throw std::invalid_argument("run_statistics: need at least one run");
  const std::size_t steps = values.front().size();
  for (const auto& v : values)
    if (v.size() != steps) throw std::invalid_argument("run_statistics: runs have different lengths");
  if (zooms.size() != steps) throw std::invalid_argument("run_statistics: zoom labels do not match");
  std::vector<ZoomStats> out;
  for (std::size_t k = 0; k < steps; ++k) {
    std::vector<double> column;
    column.reserve(values.size());
    for (const auto& v : values) column.push_back(v[k]);
    out.push_back({zooms[k], *std::min_element(column.begin(), column.end()), nearest_rank(column, 0.5),
                   nearest_rank(column, 0.16), nearest_rank(column, 0.84)});
  }
  return out;
}

struct SolveTrace {
  std::vector<RunTrace> runs;
  std::vector<ZoomStats> stats;

  std::size_t best_run() const {
    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r)
      if (runs[r].final().energy < runs[best].final().energy) best = r;
    return best;
  }
  const ZoomRecord& best() const { return runs[best_run()].final(); }

  std::vector<double> final_energies() const {
    std::vector<double> e;
    for (const auto& r : runs) e.push_back(r.final().energy);
    return e;
  }
};

inline std::vector<ZoomStats> energy_statistics(const std::vector<RunTrace>& runs) {
  std::vector<std::vector<double>> values;
  for (const auto& r : runs) {
    std::vector<double> e;
    for (const auto& z : r.zooms) e.push_back(z.energy);
    values.push_back(std::move(e));
  }
  std::vector<int> zooms;
  for (const auto& z : runs.front().zooms) zooms.push_back(z.zoom);
  return run_statistics(values, zooms);
}

namespace detail {

template <class M>
inline constexpr bool is_complex_problem = std::is_same_v<M, HermMatrix>;

inline QuboInstance build_qubo(const SymMatrix& h, const Encoding& enc) { return build_eigen_qubo(h, enc); }
inline QuboInstance build_qubo(const HermMatrix& h, const Encoding& enc) { return build_clock_qubo(h, enc); }

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1U, threads), count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < count; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// One run of the zoom loop on an already projected operator.
template <class M>
RunTrace zoom_loop(const M& projected, const M& shifted, const SolveParams& p, std::vector<double> centers,
                   std::uint64_t run_seed, unsigned sampler_threads) {
  constexpr bool complex = is_complex_problem<M>;
  const std::size_t n = projected.dim();
  const std::size_t n_centers = complex ? 2 * n : n;
  if (centers.empty()) centers.assign(n_centers, 0.0);
  if (centers.size() != n_centers) throw std::invalid_argument("solve: initial centers have the wrong length");

  RunTrace trace;
  for (int z = p.z_init; z <= p.z_max; ++z) {
    Encoding enc{p.K, z, centers};
    const QuboInstance q = build_qubo(shifted, enc);
    const AnnealSchedule sched = default_schedule(q, p.sweeps);
    auto reads = sample(q, p.reads_at(z), sched, derive_seed(run_seed, static_cast<std::uint64_t>(z)),
                        SampleOptions{sampler_threads});
    reads.push_back({Bits(q.n_vars(), 0), 0.0, 1}); // incumbent

    std::optional<StateVector> best;
    const Bits* best_bits = nullptr;
    double best_energy = 0.0;
    for (const auto& r : reads) {
      StateVector a = decode(r.bits, enc, complex);
      const double norm = a.norm();
      if (norm < 1e-6) continue;
      const double e = objective(projected, a) / (norm * norm);
      if (!best || e < best_energy || (e == best_energy && lex_less(r.bits, *best_bits))) {
        best = std::move(a);
        best_bits = &r.bits;
        best_energy = e;
      }
    }
    if (!best)
      throw SolverError("zoom step " + std::to_string(z) +
                        ": every read decoded to a null vector; increase eta to move the minimum away from zero");

    const StateVector unit = best->normalized();
    ZoomRecord rec;
    rec.zoom = z;
    rec.energy = objective(projected, unit);
    rec.wavefunction = unit.phase_aligned();
    rec.next_centers = centers_from(p.center_mode == CenterMode::normalized ? unit : *best, complex);
    centers = rec.next_centers;
    trace.zooms.push_back(std::move(rec));
  }
  return trace;
}

template <class M>
SolveTrace solve_runs(const M& h, const SolveParams& p, const std::vector<std::vector<double>>& initial) {
  p.validate();
  const M projected = project_hamiltonian(h, p.projections);
  const M shifted = projected.shifted(p.eta);
  SolveTrace out;
  out.runs.resize(p.runs);
  const unsigned hw = p.threads ? p.threads : std::max(1U, std::thread::hardware_concurrency());
  const unsigned run_threads = p.runs > 1 ? hw : 1U;
  const unsigned sampler_threads = p.runs > 1 ? 1U : hw;
  parallel_for(p.runs, run_threads, [&](std::size_t r) {
    out.runs[r] = zoom_loop(projected, shifted, p, initial[r], derive_seed(p.seed, r), sampler_threads);
  });
  out.stats = energy_statistics(out.runs);
  return out;
}

} // namespace detail

/// Runs the zoom loop p.runs times with seeds derive_seed(p.seed, run).
/// Works for real symmetric problems and for complex Hermitian (clock) ones.
template <class M>
SolveTrace solve_state(const M& h, const SolveParams& p) {
  return detail::solve_runs(h, p, std::vector<std::vector<double>>(p.runs, p.initial_centers));
}

enum class RefineStart {
  best_run, ///< every run restarts from the lowest-energy run's solution
  per_run   ///< each run restarts from its own solution
};

/// Re-runs the zoom loop around a previous solution, starting at p.z_init
/// (> 0 narrows the window around it). The default restarts every run from
/// the best previous run, as in the reference clock workflow.
template <class M>
SolveTrace refine(const M& h, const SolveTrace& previous, SolveParams p, RefineStart start = RefineStart::best_run) {
  if (previous.runs.empty()) throw std::invalid_argument("refine: previous trace has no runs");
  std::vector<std::vector<double>> initial;
  if (start == RefineStart::per_run) {
    p.runs = previous.runs.size();
    for (const auto& r : previous.runs) initial.push_back(r.final().next_centers);
  } else {
    initial.assign(p.runs, previous.best().next_centers);
  }
  return detail::solve_runs(h, p, initial);
}

/// Lowest states one after another: after solving state k it is added to the
/// projection list with chemical potential mus[k]. etas[k] is used for state
/// k. Optional per-state starting centers (multigrid) may be given.
inline std::vector<SolveTrace> solve_spectrum(const SymMatrix& h, std::size_t n_states, const std::vector<double>& etas,
                                              const std::vector<double>& mus, const SolveParams& params,
                                              const std::vector<std::vector<double>>& centers_per_state = {}) {
  if (n_states < 1) throw std::invalid_argument("solve_spectrum: need at least one state");
  if (etas.size() < n_states || mus.size() + 1 < n_states)
    throw std::invalid_argument("solve_spectrum: need one eta per state and one mu per projected state");
  std::vector<SolveTrace> out;
  std::vector<Projection> projections = params.projections;
  for (std::size_t k = 0; k < n_states; ++k) {
    SolveParams p = params;
    p.eta = etas[k];
    p.projections = projections;
    p.seed = k == 0 ? params.seed : derive_seed(params.seed, 0x5eed0000ULL + k);
    if (k < centers_per_state.size()) p.initial_centers = centers_per_state[k];
    out.push_back(solve_state(h, p));
    if (k + 1 < n_states) projections.push_back({out.back().best().wavefunction, mus[k]});
  }
  return out;
}

/// Natural cubic spline of a coarse-grid vector evaluated on a grid with twice
/// as many points over the same field range, then normalized.
inline StateVector multigrid_lift(const StateVector& coarse, const ScalarFieldSpec& coarse_spec,
                                  const ScalarFieldSpec& fine_spec) {
  if (coarse.dim() != coarse_spec.n_s) throw std::invalid_argument("multigrid_lift: vector does not match coarse grid");
  if (fine_spec.n_s != 2 * coarse_spec.n_s || fine_spec.phi_max != coarse_spec.phi_max)
    throw std::invalid_argument("multigrid_lift: fine grid must have twice the points over the same range");
  const auto xc = field_grid(coarse_spec).phi;
  const auto xf = field_grid(fine_spec).phi;
  const gsl_interp_type* type = coarse.dim() >= 3 ? gsl_interp_cspline : gsl_interp_linear;

  auto interpolate = [&](const Eigen::VectorXd& y) {
    std::unique_ptr<gsl_interp, decltype(&gsl_interp_free)> spline(gsl_interp_alloc(type, xc.size()), &gsl_interp_free);
    std::unique_ptr<gsl_interp_accel, decltype(&gsl_interp_accel_free)> acc(gsl_interp_accel_alloc(),
                                                                           &gsl_interp_accel_free);
    if (gsl_interp_init(spline.get(), xc.data(), y.data(), xc.size()) != GSL_SUCCESS)
      throw std::runtime_error("multigrid_lift: spline setup failed");
    Eigen::VectorXd out(static_cast<Eigen::Index>(xf.size()));
    for (std::size_t i = 0; i < xf.size(); ++i) {
      const double x = std::clamp(xf[i], xc.front(), xc.back());
      out(static_cast<Eigen::Index>(i)) = gsl_interp_eval(spline.get(), xc.data(), y.data(), x, acc.get());
    }
    return out;
  };
  return StateVector(interpolate(coarse.re()), interpolate(coarse.im())).normalized();
}

/// CSV with columns run, zoom, energy, wf_0..wf_{n-1} (real problems) or
/// wf_re_k, wf_im_k pairs (complex problems).
inline void write_trace_csv(std::ostream& os, const SolveTrace& trace, bool complex) {
  if (trace.runs.empty() || trace.runs.front().zooms.empty()) return;
  const std::size_t n = trace.runs.front().zooms.front().wavefunction.dim();
  os << "run,zoom,energy";
  for (std::size_t k = 0; k < n; ++k) {
    if (complex) os << ",wf_re_" << k << ",wf_im_" << k;
    else os << ",wf_" << k;
  }
  os << '\n';
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  };
  for (std::size_t r = 0; r < trace.runs.size(); ++r)
    for (const auto& z : trace.runs[r].zooms) {
      os << r << ',' << z.zoom << ',' << num(z.energy);
      for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        os << ',' << num(z.wavefunction.re()(i));
        if (complex) os << ',' << num(z.wavefunction.im()(i));
      }
      os << '\n';
    }
}

} // namespace aqae
