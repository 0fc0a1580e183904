#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mppc/error.hpp"
#include "mppc/estimator.hpp"
#include "mppc/random.hpp"
#include "mppc/sources.hpp"

using namespace mppc;

namespace {

// Test-local pmfs built from recurrences, independent of the library's
// log-gamma evaluation.
std::vector<double> poisson_table(double mean, int n_max) {
  std::vector<double> p(n_max + 1);
  p[0] = std::exp(-mean);
  for (int n = 1; n <= n_max; ++n) p[n] = p[n - 1] * mean / n;
  return p;
}

// Unnormalized (2j)! t^(2j) / (4^j (j!)^2 cosh r), normalized by summation.
std::vector<double> squeezed_table(double r, int j_max) {
  const double t2 = std::tanh(r) * std::tanh(r);
  std::vector<double> mass(2 * j_max + 1, 0.0);
  double term = 1.0 / std::cosh(r);
  double total = 0.0;
  for (int j = 0; j <= j_max; ++j) {
    mass[2 * j] = term;
    total += term;
    term *= t2 * (2.0 * j + 1.0) * (2.0 * j + 2.0) / (4.0 * (j + 1.0) * (j + 1.0));
  }
  for (double& m : mass) m /= total;
  return mass;
}

double g_from_table(const std::vector<double>& p, int l) {
  double mean = 0.0;
  double moment = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    mean += n * p[n];
    double falling = 1.0;
    for (int i = 0; i < l; ++i) falling *= static_cast<double>(n) - i;
    moment += falling * p[n];
  }
  return moment / std::pow(mean, l);
}

template <class Spec>
std::vector<std::int64_t> draw(const Spec& spec, int count, std::uint64_t seed) {
  PhotonSampler sampler(spec);
  SplitMix64 rng(seed);
  std::vector<std::int64_t> out(count);
  for (auto& x : out) x = sampler(rng);
  return out;
}

}  // namespace

TEST_CASE("pmf matches the closed-form photon statistics") {
  CHECK(pmf(Coherent{0.012}, 0) == doctest::Approx(0.98807171286193054).epsilon(1e-14));
  CHECK(pmf(DegenerateSqueezedSupermode{0.5}, 3) == 0.0);
  CHECK(pmf(SingleModeSqueezedExact{0.7}, 5) == 0.0);

  // Brute-force normalization of the squeezed-vacuum mass over n <= 200.
  const auto table = squeezed_table(0.5, 100);
  CHECK(pmf(SingleModeSqueezedExact{0.5}, 2) == doctest::Approx(table[2]).epsilon(1e-12));
  CHECK(pmf(SingleModeSqueezedExact{0.5}, 2) == doctest::Approx(0.094691091560217730).epsilon(1e-12));

  const auto poisson = poisson_table(0.5, 40);
  for (int j = 0; j < 10; ++j) {
    CHECK(pmf(DegenerateSqueezedSupermode{0.5}, 2 * j) == doctest::Approx(poisson[j]).epsilon(1e-12));
    CHECK(pmf(TwinBeamSignal{0.5}, j) == doctest::Approx(poisson[j]).epsilon(1e-12));
  }

  // Single-mode thermal is Bose-Einstein.
  for (int n = 0; n < 10; ++n) {
    CHECK(pmf(Thermal{1.0, 1}, n) == doctest::Approx(std::pow(0.5, n + 1)).epsilon(1e-12));
  }
}

TEST_CASE("pmf normalizes to one below the tail bound") {
  SplitMix64 rng(11);
  std::uniform_real_distribution<double> rate(0.0, 4.0);
  std::uniform_real_distribution<double> squeeze(0.0, 1.5);
  std::uniform_int_distribution<int> modes(1, 6);
  for (int trial = 0; trial < 40; ++trial) {
    const std::vector<PhotonSourceSpec> specs = {
        Coherent{rate(rng)},        TwinBeamSignal{rate(rng)}, DegenerateSqueezedSupermode{rate(rng)},
        SingleModeSqueezedExact{squeeze(rng)}, Thermal{rate(rng), modes(rng)},
    };
    for (const auto& spec : specs) {
      const std::int64_t bound = tail_bound(spec);
      double total = 0.0;
      for (std::int64_t n = 0; n <= bound; ++n) total += pmf(spec, n);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("mean photon numbers") {
  CHECK(mean_photons(Coherent{0.012}) == 0.012);
  CHECK(mean_photons(DegenerateSqueezedSupermode{0.0}) == 0.0);
  CHECK(mean_photons(SingleModeSqueezedExact{1.0}) == doctest::Approx(1.3810978455418157).epsilon(1e-14));

  const std::vector<PhotonSourceSpec> specs = {Coherent{1.3}, TwinBeamSignal{0.4}, DegenerateSqueezedSupermode{0.7},
                                               SingleModeSqueezedExact{1.0}, Thermal{2.0, 3}};
  for (const auto& spec : specs) {
    double weighted = 0.0;
    for (std::int64_t n = 0; n <= tail_bound(spec); ++n) weighted += n * pmf(spec, n);
    CHECK(weighted == doctest::Approx(mean_photons(spec)).epsilon(1e-9));
  }
}

TEST_CASE("analytic correlation functions") {
  for (int l = 2; l <= 6; ++l) {
    CHECK(analytic_g(Coherent{0.3}, l) == 1.0);
    CHECK(analytic_g(TwinBeamSignal{2.0}, l) == 1.0);
  }
  CHECK(analytic_g(DegenerateSqueezedSupermode{0.5}, 2) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(analytic_g(Thermal{1.0, 1}, 2) == 2.0);

  for (double r : {0.3, 0.5, 1.0}) {
    const double expected = 3.0 + 1.0 / (std::sinh(r) * std::sinh(r));
    CHECK(analytic_g(SingleModeSqueezedExact{r}, 2) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(g_from_table(squeezed_table(r, 400), 2) == doctest::Approx(expected).epsilon(1e-9));
  }
  CHECK(analytic_g(SingleModeSqueezedExact{0.5}, 3) ==
        doctest::Approx(g_from_table(squeezed_table(0.5, 400), 3)).epsilon(1e-9));

  // Supermode: g2 - 1 = 1 / <n> exactly; g3 against a recurrence-built table.
  for (double mu_pairs : {0.01, 0.2, 1.0, 7.5}) {
    const DegenerateSqueezedSupermode spec{mu_pairs};
    const double lhs = analytic_g(spec, 2) - 1.0;
    CHECK(lhs == doctest::Approx(1.0 / mean_photons(spec)).epsilon(1e-12));
  }
  {
    const auto poisson = poisson_table(0.5, 60);
    std::vector<double> supermode(121, 0.0);
    for (int j = 0; j <= 60; ++j) supermode[2 * j] = poisson[j];
    CHECK(analytic_g(DegenerateSqueezedSupermode{0.5}, 3) == doctest::Approx(g_from_table(supermode, 3)).epsilon(1e-9));
    CHECK(analytic_g(DegenerateSqueezedSupermode{0.5}, 3) == doctest::Approx(4.0).epsilon(1e-9));
  }
  CHECK(analytic_g(Thermal{2.0, 3}, 3) == doctest::Approx(4.0 * 5.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("invalid and degenerate specs") {
  CHECK_THROWS_AS(pmf(Coherent{-1.0}, 0), InvalidSpec);
  CHECK_THROWS_AS(validate(Thermal{1.0, 0}), InvalidSpec);
  CHECK_THROWS_AS(PhotonSampler(SingleModeSqueezedExact{-0.1}), InvalidSpec);
  CHECK_THROWS_AS(analytic_g(Coherent{0.0}, 2), UndefinedCorrelation);
  CHECK_THROWS_AS(analytic_g(DegenerateSqueezedSupermode{0.0}, 2), UndefinedCorrelation);
}

TEST_CASE("samplers") {
  SUBCASE("zero rate draws zero") {
    for (auto n : draw(Coherent{0.0}, 1000, 1)) CHECK(n == 0);
  }
  SUBCASE("supermode mean is twice the pair number") {
    const auto xs = draw(DegenerateSqueezedSupermode{0.5}, 1'000'000, 2);
    double mean = 0.0;
    bool all_even = true;
    for (auto x : xs) {
      mean += static_cast<double>(x);
      all_even = all_even && x % 2 == 0;
    }
    CHECK(all_even);
    CHECK(mean / xs.size() == doctest::Approx(1.0).epsilon(0.01));
  }
  SUBCASE("single-mode thermal variance mu(1 + mu)") {
    const auto xs = draw(Thermal{1.0, 1}, 1'000'000, 3);
    double s = 0.0;
    double ss = 0.0;
    for (auto x : xs) {
      s += static_cast<double>(x);
      ss += static_cast<double>(x * x);
    }
    const double mean = s / xs.size();
    CHECK(ss / xs.size() - mean * mean == doctest::Approx(2.0).epsilon(0.025));
  }
  SUBCASE("same seed, same sequence") {
    CHECK(draw(SingleModeSqueezedExact{0.8}, 5000, 99) == draw(SingleModeSqueezedExact{0.8}, 5000, 99));
    CHECK(draw(SingleModeSqueezedExact{0.8}, 5000, 99) != draw(SingleModeSqueezedExact{0.8}, 5000, 100));
  }
}

TEST_CASE("empirical g2 of 10^7 samples agrees with analytic_g") {
  const std::vector<PhotonSourceSpec> specs = {Coherent{1.0}, TwinBeamSignal{0.3}, DegenerateSqueezedSupermode{0.5},
                                               SingleModeSqueezedExact{0.6}, Thermal{1.5, 2}};
  std::uint64_t seed = 1000;
  for (const auto& spec : specs) {
    PhotonSampler sampler(spec);
    SplitMix64 rng(++seed);
    CountHistogram hist;
    for (int i = 0; i < 10'000'000; ++i) hist.record(static_cast<int>(sampler(rng)));
    const double g = g_from_histogram(hist, 2, 2, EstimatorMode::large_m).value;
    const double se = bootstrap_std_error(hist, 2, 2, EstimatorMode::large_m, 200, seed);
    INFO(source_kind(spec), " g=", g, " se=", se);
    CHECK(std::abs(g - analytic_g(spec, 2)) < 3.0 * se);
  }
}
