#pragma once

// Classical stand-in for the annealer: seeded single-spin-flip Metropolis
// simulated annealing directly on the QUBO, plus an exhaustive solver for
// small instances.

#include "aqae/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

namespace aqae {

struct AnnealSchedule {
  double beta_start = 0.1;
  double beta_end = 10.0;
  int sweeps = 1000;

  void validate() const {
    if (!(beta_start > 0.0) || !(beta_end > 0.0)) throw std::invalid_argument("AnnealSchedule: betas must be positive");
    if (beta_start > beta_end) throw std::invalid_argument("AnnealSchedule: beta_start must not exceed beta_end");
    if (sweeps < 1) throw std::invalid_argument("AnnealSchedule: need at least one sweep");
  }

  /// Geometric interpolation between beta_start and beta_end.
  double beta_at(int sweep) const {
    if (sweeps == 1) return beta_end;
    const double f = static_cast<double>(sweep) / static_cast<double>(sweeps - 1);
    return beta_start * std::pow(beta_end / beta_start, f);
  }
};

struct AnnealRead {
  Bits bits;
  double qubo_energy = 0.0;
  std::size_t multiplicity = 1;
};

/// SplitMix64 finalizer; derives independent stream seeds from (seed, index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t x = seed ^ (index + 0x9e3779b97f4a7c15ULL + (index << 6) + (index >> 2));
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace detail {

/// Full symmetric coupling matrix with zero diagonal, plus the diagonal.
struct DenseQubo {
  std::size_t n = 0;
  std::vector<double> coupling; // n x n, symmetric, zero diagonal
  std::vector<double> diag;

  explicit DenseQubo(const QuboInstance& q) : n(q.n_vars()), coupling(n * n, 0.0), diag(n, 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      diag[i] = q(i, i);
      for (std::size_t j = i + 1; j < n; ++j) coupling[i * n + j] = coupling[j * n + i] = q(i, j);
    }
  }
};

inline bool lex_less(const Bits& a, const Bits& b) { return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()); }

inline AnnealRead anneal_one(const DenseQubo& q, const QuboInstance& inst, const AnnealSchedule& sched,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const std::size_t n = q.n;
  Bits bits(n);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);

  // field[i] = sum_{j != i} coupling_ij q_j
  std::vector<double> field(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!bits[i]) continue;
    const double* row = &q.coupling[i * n];
    for (std::size_t j = 0; j < n; ++j) field[j] += row[j];
  }
#ifdef AQAE_CHECK_ENERGY
  double energy = inst.energy(bits);
#endif
  (void)inst;

  for (int s = 0; s < sched.sweeps; ++s) {
    const double beta = sched.beta_at(s);
    for (std::size_t i = 0; i < n; ++i) {
      const double sign = bits[i] ? -1.0 : 1.0;
      const double delta = sign * (q.diag[i] + field[i]);
      if (delta > 0.0) {
        // exp(-40) is below the resolution of a 53-bit uniform draw.
        const double x = beta * delta;
        if (x > 40.0 || uniform(rng) >= std::exp(-x)) continue;
      }
      bits[i] ^= 1U;
      const double* row = &q.coupling[i * n];
      for (std::size_t j = 0; j < n; ++j) field[j] += sign * row[j];
#ifdef AQAE_CHECK_ENERGY
      energy += delta;
      const double full = inst.energy(bits);
      if (std::abs(full - energy) > 1e-9 * std::max(1.0, std::abs(full)))
        throw std::logic_error("anneal: incremental energy drifted from full recomputation");
#endif
    }
  }
  return {bits, inst.energy(bits), 1};
}

} // namespace detail

/// Schedule from the instance's energy scales: beta_start = ln 2 / max row
/// L1 norm, beta_end = ln 1000 / min non-zero |coefficient|.
inline AnnealSchedule default_schedule(const QuboInstance& q, int sweeps = 1000) {
  if (q.empty()) throw std::invalid_argument("default_schedule: empty instance");
  const std::size_t n = q.n_vars();
  double max_row = 0.0, min_coeff = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = std::abs(q(i, j));
      row += v;
      if (v > 0.0) min_coeff = std::min(min_coeff, v);
    }
    max_row = std::max(max_row, row);
  }
  if (max_row == 0.0) throw std::invalid_argument("default_schedule: all-zero instance");
  AnnealSchedule s;
  s.beta_start = std::log(2.0) / max_row;
  s.beta_end = std::log(1000.0) / min_coeff;
  s.sweeps = sweeps;
  return s;
}

struct SampleOptions {
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// num_reads independent Metropolis chains; read r uses the stream
/// derive_seed(seed, r). Identical bitstrings are merged and the result is
/// sorted by energy, then lexicographically by bits, so the output does not
/// depend on the thread count.
inline std::vector<AnnealRead> sample(const QuboInstance& q, std::size_t num_reads, const AnnealSchedule& sched,
                                      std::uint64_t seed, SampleOptions opts = {}) {
  if (q.empty()) throw std::invalid_argument("sample: empty instance");
  if (num_reads < 1) throw std::invalid_argument("sample: need at least one read");
  sched.validate();

  const detail::DenseQubo dense(q);
  std::vector<AnnealRead> reads(num_reads);
  unsigned threads = opts.threads ? opts.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, num_reads));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) reads[r] = detail::anneal_one(dense, q, sched, derive_seed(seed, r));
  };
  if (threads <= 1) {
    work(0, num_reads);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (num_reads + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk, e = std::min(num_reads, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }

  std::map<Bits, AnnealRead> merged;
  for (auto& r : reads) {
    auto [it, inserted] = merged.try_emplace(r.bits, r);
    if (!inserted) it->second.multiplicity += 1;
  }
  std::vector<AnnealRead> out;
  out.reserve(merged.size());
  for (auto& kv : merged) out.push_back(std::move(kv.second));
  std::stable_sort(out.begin(), out.end(), [](const AnnealRead& a, const AnnealRead& b) {
    if (a.qubo_energy != b.qubo_energy) return a.qubo_energy < b.qubo_energy;
    return detail::lex_less(a.bits, b.bits);
  });
  return out;
}

struct BruteForceResult {
  Bits bits;
  double energy = 0.0;
};

/// Exact optimum by Gray-code enumeration; ties go to the lexicographically
/// smallest bitstring.
inline BruteForceResult brute_force(const QuboInstance& q) {
  const std::size_t n = q.n_vars();
  if (n > 24) throw std::invalid_argument("brute_force: more than 24 variables");
  const detail::DenseQubo dense(q);
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) scale = std::max(scale, std::abs(q(i, j)));
  const double tie_tol = 1e-12 * scale * static_cast<double>(std::max<std::size_t>(n, 1));

  Bits bits(n, 0);
  std::vector<double> field(n, 0.0);
  double energy = 0.0;
  BruteForceResult best{bits, 0.0};
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const auto i = static_cast<std::size_t>(__builtin_ctzll(k));
    const double sign = bits[i] ? -1.0 : 1.0;
    energy += sign * (dense.diag[i] + field[i]);
    bits[i] ^= 1U;
    const double* row = &dense.coupling[i * n];
    for (std::size_t j = 0; j < n; ++j) field[j] += sign * row[j];

    if (energy < best.energy - tie_tol) {
      best = {bits, q.energy(bits)};
      energy = best.energy;
    } else if (energy <= best.energy + tie_tol) {
      const double exact = q.energy(bits);
      if (exact < best.energy - tie_tol || (exact <= best.energy + tie_tol && detail::lex_less(bits, best.bits)))
        best = {bits, exact};
    }
  }
  return best;
}

} // namespace aqae
