#include "aqae/annealer.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace aqae;
using Catch::Matchers::WithinAbs;

namespace {

QuboInstance random_qubo(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  QuboInstance q(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) q.set(i, j, u(rng));
  return q;
}

// Plain enumeration without Gray-code bookkeeping.
double enumerate_min(const QuboInstance& q) {
  const std::size_t n = q.n_vars();
  double best = 0.0;
  for (std::uint64_t m = 0; m < (1ULL << n); ++m) {
    Bits b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>((m >> i) & 1U);
    best = std::min(best, q.energy(b));
  }
  return best;
}

std::size_t total_reads(const std::vector<AnnealRead>& reads) {
  std::size_t s = 0;
  for (const auto& r : reads) s += r.multiplicity;
  return s;
}

} // namespace

TEST_CASE("single attractive bit", "[annealer]") {
  QuboInstance q(1);
  q.set(0, 0, -1.0);
  const auto reads = sample(q, 100, default_schedule(q), 1);
  REQUIRE(reads.size() == 1);
  CHECK(reads[0].bits == Bits{1});
  CHECK(reads[0].qubo_energy == -1.0);
  CHECK(reads[0].multiplicity == 100);
}

TEST_CASE("frustrated pair hits the ground level", "[annealer]") {
  QuboInstance q(2);
  q.set(0, 0, -1.0);
  q.set(1, 1, -1.0);
  q.set(0, 1, 2.0);
  const auto reads = sample(q, 1000, default_schedule(q), 9);
  std::size_t ground = 0;
  for (const auto& r : reads)
    if (r.qubo_energy == -1.0) ground += r.multiplicity;
  CHECK(ground >= 999);
  CHECK(total_reads(reads) == 1000);
}

TEST_CASE("reads are merged and ordered by energy then bits", "[annealer]") {
  const QuboInstance q = random_qubo(8, 4);
  const auto reads = sample(q, 300, AnnealSchedule{0.01, 0.1, 5}, 2);
  CHECK(total_reads(reads) == 300);
  for (std::size_t k = 1; k < reads.size(); ++k) {
    CHECK(reads[k - 1].bits != reads[k].bits);
    const bool ordered = reads[k - 1].qubo_energy < reads[k].qubo_energy ||
                         (reads[k - 1].qubo_energy == reads[k].qubo_energy && reads[k - 1].bits < reads[k].bits);
    CHECK(ordered);
  }
  for (const auto& r : reads) CHECK(r.qubo_energy == q.energy(r.bits));
}

TEST_CASE("sampling is deterministic and independent of the thread count", "[annealer]") {
  const QuboInstance q = random_qubo(10, 8);
  const auto sched = default_schedule(q, 50);
  const auto a = sample(q, 200, sched, 77, SampleOptions{1});
  const auto b = sample(q, 200, sched, 77, SampleOptions{4});
  const auto c = sample(q, 200, sched, 77, SampleOptions{1});
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].bits == b[k].bits);
    CHECK(a[k].multiplicity == b[k].multiplicity);
    CHECK(a[k].bits == c[k].bits);
  }
  // A hot, short schedule leaves a spread of states, so another seed differs.
  const AnnealSchedule hot{0.01, 0.1, 3};
  const auto e = sample(q, 200, hot, 77, SampleOptions{1});
  const auto d = sample(q, 200, hot, 78, SampleOptions{1});
  bool differs = d.size() != e.size();
  for (std::size_t k = 0; !differs && k < e.size(); ++k) differs = e[k].multiplicity != d[k].multiplicity || e[k].bits != d[k].bits;
  CHECK(differs);
}

TEST_CASE("default schedule from the energy scales", "[annealer]") {
  QuboInstance one(1);
  one.set(0, 0, -1.0);
  const auto s = default_schedule(one);
  CHECK_THAT(s.beta_start, WithinAbs(std::log(2.0), 1e-15));
  CHECK_THAT(s.beta_end, WithinAbs(std::log(1000.0), 1e-15));
  CHECK(s.sweeps == 1000);

  const QuboInstance q = random_qubo(6, 3);
  const auto base = default_schedule(q);
  const auto scaled = default_schedule(q.scaled(4.0));
  CHECK_THAT(scaled.beta_start, WithinAbs(base.beta_start / 4.0, 1e-15));
  CHECK_THAT(scaled.beta_end, WithinAbs(base.beta_end / 4.0, 1e-15));

  CHECK_THROWS_AS(default_schedule(QuboInstance(3)), std::invalid_argument);
  CHECK_THROWS_AS(default_schedule(QuboInstance()), std::invalid_argument);
  CHECK_THROWS_AS(sample(QuboInstance(), 1, s, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample(q, 1, AnnealSchedule{2.0, 1.0, 10}, 1), std::invalid_argument);
}

TEST_CASE("power-of-two rescaling leaves the dynamics unchanged", "[annealer]") {
  const QuboInstance q = random_qubo(10, 12);
  for (double c : {0.5, 8.0}) {
    const QuboInstance qs = q.scaled(c);
    const auto a = sample(q, 100, default_schedule(q, 40), 5, SampleOptions{1});
    const auto b = sample(qs, 100, default_schedule(qs, 40), 5, SampleOptions{1});
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].bits == b[k].bits);
      CHECK(a[k].multiplicity == b[k].multiplicity);
    }
  }
}

TEST_CASE("brute force", "[annealer]") {
  const auto zero = brute_force(QuboInstance(5));
  CHECK(zero.bits == Bits(5, 0));
  CHECK(zero.energy == 0.0);
  QuboInstance one(1);
  one.set(0, 0, -1.0);
  CHECK(brute_force(one).bits == Bits{1});
  CHECK(brute_force(one).energy == -1.0);
  CHECK_THROWS_AS(brute_force(QuboInstance(25)), std::invalid_argument);

  // Ties: two degenerate minima, lexicographically smallest wins.
  QuboInstance tie(2);
  tie.set(0, 0, -1.0);
  tie.set(1, 1, -1.0);
  tie.set(0, 1, 2.0);
  CHECK(brute_force(tie).bits == Bits{0, 1});

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const QuboInstance q = random_qubo(10, 100 + seed);
    const auto bf = brute_force(q);
    CHECK_THAT(bf.energy, WithinAbs(enumerate_min(q), 1e-12));
    CHECK(bf.energy == q.energy(bf.bits));
  }
}

TEST_CASE("sampler finds the exact optimum of small instances", "[annealer]") {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const QuboInstance q = random_qubo(12, 500 + seed);
    const auto reads = sample(q, 200, default_schedule(q, 200), seed);
    if (std::abs(reads.front().qubo_energy - brute_force(q).energy) <= 1e-12) ++hits;
  }
  CHECK(hits >= 19);
}

TEST_CASE("success rate does not drop with more sweeps", "[annealer]") {
  double previous = -1.0;
  for (int sweeps : {10, 100, 1000}) {
    std::size_t success = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const QuboInstance q = random_qubo(12, 900 + seed);
      const double opt = brute_force(q).energy;
      for (const auto& r : sample(q, 10, default_schedule(q, sweeps), seed)) {
        if (std::abs(r.qubo_energy - opt) <= 1e-12) success += r.multiplicity;
        total += r.multiplicity;
      }
    }
    const double rate = static_cast<double>(success) / static_cast<double>(total);
    CHECK(rate >= previous);
    previous = rate;
  }
}
