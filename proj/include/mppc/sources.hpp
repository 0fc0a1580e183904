#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <variant>

namespace mppc {

struct Coherent {
  double mu = 0.0;  // mean photons per pulse
};

// Signal arm of a two-mode squeezed vacuum under multimode detection:
// one photon per Poissonian pair.
struct TwinBeamSignal {
  double mu_pairs = 0.0;
};

// Degenerate squeezed vacuum under multimode detection: two photons per
// Poissonian pair.
struct DegenerateSqueezedSupermode {
  double mu_pairs = 0.0;
};

struct SingleModeSqueezedExact {
  double r = 0.0;  // squeezing parameter
};

// Negative-binomial statistics of `modes` equally populated thermal modes.
struct Thermal {
  double mu = 0.0;
  int modes = 1;
};

using PhotonSourceSpec =
    std::variant<Coherent, TwinBeamSignal, DegenerateSqueezedSupermode, SingleModeSqueezedExact, Thermal>;

// Throws InvalidSpec on negative rates or modes < 1.
void validate(const PhotonSourceSpec& spec);

double pmf(const PhotonSourceSpec& spec, std::int64_t n);

double mean_photons(const PhotonSourceSpec& spec);

/// Smallest N such that the mass on [0, N] exceeds 1 - tail_mass.
std::int64_t tail_bound(const PhotonSourceSpec& spec, double tail_mass = 1e-12);

/// Normalized l-th order correlation <n(n-1)...(n-l+1)> / <n>^l.
/// Closed forms for Poissonian and thermal statistics and for l = 2 of the
/// squeezed states; truncated pmf sums otherwise. Throws UndefinedCorrelation
/// when the mean photon number is zero.
double analytic_g(const PhotonSourceSpec& spec, int l);

/// Same state family rescaled to the requested mean photon number.
PhotonSourceSpec with_mean_photons(const PhotonSourceSpec& spec, double mean);

std::string source_kind(const PhotonSourceSpec& spec);

/// Draws photon numbers distributed per pmf(spec, .). Construct once per
/// worker; the generator argument carries all state.
class PhotonSampler {
 public:
  explicit PhotonSampler(const PhotonSourceSpec& spec);

  template <class Generator>
  std::int64_t operator()(Generator& rng) {
    switch (kind_) {
      case Kind::zero:
        return 0;
      case Kind::poisson:
        return multiplier_ * poisson(rng, rate_);
      case Kind::gamma_poisson: {
        gamma_.reset();  // libstdc++ caches a normal variate between calls
        const double lambda = gamma_(rng);
        return multiplier_ * poisson(rng, lambda);
      }
    }
    return 0;
  }

 private:
  enum class Kind { zero, poisson, gamma_poisson };

  template <class Generator>
  static std::int64_t poisson(Generator& rng, double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::int64_t> dist(mean);
    return dist(rng);
  }

  Kind kind_ = Kind::zero;
  std::int64_t multiplier_ = 1;
  double rate_ = 0.0;
  std::gamma_distribution<double> gamma_;
};

template <class Generator>
std::int64_t sample_photon_number(const PhotonSourceSpec& spec, Generator& rng) {
  PhotonSampler sampler(spec);
  return sampler(rng);
}

}  // namespace mppc
