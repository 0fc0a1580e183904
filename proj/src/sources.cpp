#include "mppc/sources.hpp"

#include <cmath>

#include "mppc/error.hpp"

namespace mppc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double poisson_pmf(double mean, std::int64_t n) {
  if (n < 0) return 0.0;
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  const double x = static_cast<double>(n);
  return std::exp(x * std::log(mean) - mean - std::lgamma(x + 1.0));
}

double squeezed_pmf(double r, std::int64_t n) {
  if (n < 0 || n % 2 != 0) return 0.0;
  if (r == 0.0) return n == 0 ? 1.0 : 0.0;
  const double j = static_cast<double>(n / 2);
  const double log_t = std::log(std::tanh(r));
  return std::exp(std::lgamma(2.0 * j + 1.0) + 2.0 * j * log_t - j * std::log(4.0) -
                  2.0 * std::lgamma(j + 1.0) - std::log(std::cosh(r)));
}

double thermal_pmf(double mean, int modes, std::int64_t n) {
  if (n < 0) return 0.0;
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  const double x = static_cast<double>(n);
  const double m = modes;
  return std::exp(std::lgamma(x + m) - std::lgamma(m) - std::lgamma(x + 1.0) + m * std::log(m / (m + mean)) +
                  x * std::log(mean / (m + mean)));
}

void require_non_negative(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw InvalidSpec(std::string("source parameter ") + name + " must be finite and non-negative");
  }
}

double falling_factorial(std::int64_t n, int l) {
  double out = 1.0;
  for (int i = 0; i < l; ++i) out *= static_cast<double>(n - i);
  return out;
}

double truncated_g(const PhotonSourceSpec& spec, int l, double mean) {
  // The tail bound covers the probability mass; keep going until the weighted
  // terms stop mattering too.
  const std::int64_t bound = tail_bound(spec);
  double moment = 0.0;
  double previous = 0.0;
  for (std::int64_t n = l;; ++n) {
    const double term = falling_factorial(n, l) * pmf(spec, n);
    moment += term;
    // Odd terms vanish for pair sources, so look at two in a row.
    if (n > bound && term + previous < 1e-18 * moment) break;
    previous = term;
  }
  return moment / std::pow(mean, l);
}

}  // namespace

void validate(const PhotonSourceSpec& spec) {
  std::visit(overloaded{
                 [](const Coherent& s) { require_non_negative(s.mu, "mu"); },
                 [](const TwinBeamSignal& s) { require_non_negative(s.mu_pairs, "mu_pairs"); },
                 [](const DegenerateSqueezedSupermode& s) { require_non_negative(s.mu_pairs, "mu_pairs"); },
                 [](const SingleModeSqueezedExact& s) { require_non_negative(s.r, "r"); },
                 [](const Thermal& s) {
                   require_non_negative(s.mu, "mu");
                   if (s.modes < 1) throw InvalidSpec("thermal source needs modes >= 1");
                 },
             },
             spec);
}

double pmf(const PhotonSourceSpec& spec, std::int64_t n) {
  validate(spec);
  return std::visit(overloaded{
                        [n](const Coherent& s) { return poisson_pmf(s.mu, n); },
                        [n](const TwinBeamSignal& s) { return poisson_pmf(s.mu_pairs, n); },
                        [n](const DegenerateSqueezedSupermode& s) {
                          return n % 2 == 0 ? poisson_pmf(s.mu_pairs, n / 2) : 0.0;
                        },
                        [n](const SingleModeSqueezedExact& s) { return squeezed_pmf(s.r, n); },
                        [n](const Thermal& s) { return thermal_pmf(s.mu, s.modes, n); },
                    },
                    spec);
}

double mean_photons(const PhotonSourceSpec& spec) {
  validate(spec);
  return std::visit(overloaded{
                        [](const Coherent& s) { return s.mu; },
                        [](const TwinBeamSignal& s) { return s.mu_pairs; },
                        [](const DegenerateSqueezedSupermode& s) { return 2.0 * s.mu_pairs; },
                        [](const SingleModeSqueezedExact& s) { return std::sinh(s.r) * std::sinh(s.r); },
                        [](const Thermal& s) { return s.mu; },
                    },
                    spec);
}

std::int64_t tail_bound(const PhotonSourceSpec& spec, double tail_mass) {
  validate(spec);
  constexpr std::int64_t kLimit = 100'000'000;
  double cumulative = 0.0;
  for (std::int64_t n = 0; n < kLimit; ++n) {
    cumulative += pmf(spec, n);
    if (cumulative > 1.0 - tail_mass) return n;
  }
  throw InvalidSpec("photon-number distribution too wide to truncate");
}

double analytic_g(const PhotonSourceSpec& spec, int l) {
  if (l < 2) throw std::invalid_argument("correlation order must be >= 2");
  const double mean = mean_photons(spec);
  if (mean <= 0.0) throw UndefinedCorrelation("correlation function undefined at zero mean photon number");

  return std::visit(overloaded{
                        [](const Coherent&) { return 1.0; },
                        [](const TwinBeamSignal&) { return 1.0; },
                        [&](const DegenerateSqueezedSupermode& s) {
                          if (l == 2) return 1.0 + 1.0 / (2.0 * s.mu_pairs);
                          return truncated_g(spec, l, mean);
                        },
                        [&](const SingleModeSqueezedExact&) {
                          if (l == 2) return 3.0 + 1.0 / mean;
                          return truncated_g(spec, l, mean);
                        },
                        [l](const Thermal& s) {
                          double g = 1.0;
                          for (int i = 0; i < l; ++i) g *= (s.modes + i) / static_cast<double>(s.modes);
                          return g;
                        },
                    },
                    spec);
}

PhotonSourceSpec with_mean_photons(const PhotonSourceSpec& spec, double mean) {
  if (!(mean >= 0.0)) throw InvalidSpec("mean photon number must be non-negative");
  return std::visit(overloaded{
                        [mean](const Coherent&) -> PhotonSourceSpec { return Coherent{mean}; },
                        [mean](const TwinBeamSignal&) -> PhotonSourceSpec { return TwinBeamSignal{mean}; },
                        [mean](const DegenerateSqueezedSupermode&) -> PhotonSourceSpec {
                          return DegenerateSqueezedSupermode{mean / 2.0};
                        },
                        [mean](const SingleModeSqueezedExact&) -> PhotonSourceSpec {
                          return SingleModeSqueezedExact{std::asinh(std::sqrt(mean))};
                        },
                        [mean](const Thermal& s) -> PhotonSourceSpec { return Thermal{mean, s.modes}; },
                    },
                    spec);
}

std::string source_kind(const PhotonSourceSpec& spec) {
  return std::visit(overloaded{
                        [](const Coherent&) { return std::string("coherent"); },
                        [](const TwinBeamSignal&) { return std::string("twin_beam_signal"); },
                        [](const DegenerateSqueezedSupermode&) { return std::string("squeezed_supermode"); },
                        [](const SingleModeSqueezedExact&) { return std::string("squeezed_exact"); },
                        [](const Thermal&) { return std::string("thermal"); },
                    },
                    spec);
}

PhotonSampler::PhotonSampler(const PhotonSourceSpec& spec) {
  validate(spec);
  std::visit(overloaded{
                 [this](const Coherent& s) {
                   kind_ = s.mu > 0.0 ? Kind::poisson : Kind::zero;
                   rate_ = s.mu;
                 },
                 [this](const TwinBeamSignal& s) {
                   kind_ = s.mu_pairs > 0.0 ? Kind::poisson : Kind::zero;
                   rate_ = s.mu_pairs;
                 },
                 [this](const DegenerateSqueezedSupermode& s) {
                   kind_ = s.mu_pairs > 0.0 ? Kind::poisson : Kind::zero;
                   rate_ = s.mu_pairs;
                   multiplier_ = 2;
                 },
                 // Pair number is negative binomial with shape 1/2 and odds tanh^2 r,
                 // i.e. Poisson with a Gamma(1/2, sinh^2 r) distributed rate.
                 [this](const SingleModeSqueezedExact& s) {
                   if (s.r == 0.0) return;
                   kind_ = Kind::gamma_poisson;
                   const double sh = std::sinh(s.r);
                   gamma_ = std::gamma_distribution<double>(0.5, sh * sh);
                   multiplier_ = 2;
                 },
                 [this](const Thermal& s) {
                   if (s.mu == 0.0) return;
                   kind_ = Kind::gamma_poisson;
                   gamma_ = std::gamma_distribution<double>(s.modes, s.mu / s.modes);
                 },
             },
             spec);
}

}  // namespace mppc
