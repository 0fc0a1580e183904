#include "mppc/detector.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mppc/error.hpp"
#include "parallel.hpp"

namespace mppc {

namespace {

constexpr std::int64_t kMinTrialsPerWorker = 50'000;

// Uniform choice among pixels that have not fired yet.
template <class Generator>
bool fire_unfired(PixelArray& pixels, Generator& rng) {
  const int m = pixels.pixels();
  if (pixels.fired() >= m) return false;
  std::uniform_int_distribution<int> pick(0, m - 1);
  if (2 * pixels.fired() < m) {
    for (;;) {
      if (pixels.fire(pick(rng))) return true;
    }
  }
  std::vector<int> free;
  free.reserve(static_cast<std::size_t>(m - pixels.fired()));
  for (int p = 0; p < m; ++p) {
    if (!pixels.is_fired(p)) free.push_back(p);
  }
  std::uniform_int_distribution<std::size_t> choose(0, free.size() - 1);
  pixels.fire(free[choose(rng)]);
  return true;
}

}  // namespace

std::string to_string(CrosstalkMode mode) {
  switch (mode) {
    case CrosstalkMode::off:
      return "off";
    case CrosstalkMode::per_avalanche:
      return "per_avalanche";
    case CrosstalkMode::event_linear:
      return "event_linear";
  }
  return "off";
}

CrosstalkMode crosstalk_mode_from_string(const std::string& name) {
  if (name == "off") return CrosstalkMode::off;
  if (name == "per_avalanche") return CrosstalkMode::per_avalanche;
  if (name == "event_linear") return CrosstalkMode::event_linear;
  throw ConfigError("unknown crosstalk mode '" + name + "'");
}

void DetectorConfig::validate() const {
  if (pixels < 2) throw InvalidSpec("detector needs at least 2 pixels");
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw InvalidSpec("efficiency must lie in [0, 1]");
  if (!(dark_mean >= 0.0) || !std::isfinite(dark_mean)) throw InvalidSpec("dark mean must be non-negative");
  if (!(crosstalk_p >= 0.0 && crosstalk_p < 1.0)) throw InvalidSpec("crosstalk probability must lie in [0, 1)");
}

PulseOutcome detect_one_pulse(std::int64_t n_photons, const DetectorConfig& config, PulseStreams& streams,
                              PixelArray& scratch) {
  scratch.clear();
  std::uniform_int_distribution<int> pick(0, config.pixels - 1);

  std::bernoulli_distribution survives(config.efficiency);
  for (std::int64_t i = 0; i < n_photons; ++i) {
    if (survives(streams.detection)) scratch.fire(pick(streams.detection));
  }

  if (config.dark_mean > 0.0) {
    std::poisson_distribution<int> dark(config.dark_mean);
    const int avalanches = dark(streams.dark);
    for (int i = 0; i < avalanches; ++i) scratch.fire(pick(streams.dark));
  }

  PulseOutcome out;
  const int primaries = scratch.fired();
  if (primaries > 0 && config.crosstalk_p > 0.0) {
    switch (config.crosstalk_mode) {
      case CrosstalkMode::off:
        break;
      case CrosstalkMode::per_avalanche: {
        std::bernoulli_distribution triggers(config.crosstalk_p);
        int secondaries = 0;
        for (int i = 0; i < primaries; ++i) secondaries += triggers(streams.crosstalk) ? 1 : 0;
        for (int i = 0; i < secondaries; ++i) fire_unfired(scratch, streams.crosstalk);
        break;
      }
      case CrosstalkMode::event_linear: {
        double p = primaries * config.crosstalk_p;
        if (p > 1.0) {
          out.crosstalk_capped = true;
          p = 1.0;
        }
        std::bernoulli_distribution triggers(p);
        if (triggers(streams.crosstalk)) fire_unfired(scratch, streams.crosstalk);
        break;
      }
    }
  }
  out.fired = scratch.fired();
  return out;
}

CountHistogram simulate_trial_range(const PhotonSourceSpec& spec, const DetectorConfig& config, std::uint64_t seed,
                                    std::int64_t first, std::int64_t last, SimulationDiagnostics* diag) {
  config.validate();
  PhotonSampler sampler(spec);
  PixelArray scratch(config.pixels);
  CountHistogram hist;
  std::int64_t capped = 0;
  for (std::int64_t t = first; t < last; ++t) {
    auto source_rng = substream(seed, static_cast<std::uint64_t>(t), Channel::source);
    const std::int64_t n = sampler(source_rng);
    auto streams = PulseStreams::for_trial(seed, static_cast<std::uint64_t>(t));
    const PulseOutcome outcome = detect_one_pulse(n, config, streams, scratch);
    capped += outcome.crosstalk_capped ? 1 : 0;
    hist.record(outcome.fired);
  }
  if (diag) diag->capped_crosstalk_pulses += capped;
  return hist;
}

CountHistogram simulate_histogram(const PhotonSourceSpec& spec, const DetectorConfig& config, std::int64_t trials,
                                  std::uint64_t seed, SimulationDiagnostics* diag) {
  if (trials < 1) throw ConfigError("simulation needs at least one trial");
  validate(spec);
  config.validate();

  struct Partial {
    CountHistogram hist;
    SimulationDiagnostics diag;
  };
  auto run = [&](std::int64_t first, std::int64_t last) {
    Partial p;
    p.hist = simulate_trial_range(spec, config, seed, first, last, &p.diag);
    return p;
  };
  auto combine = [](Partial& into, const Partial& from) {
    into.hist.merge(from.hist);
    into.diag.capped_crosstalk_pulses += from.diag.capped_crosstalk_pulses;
  };
  Partial result = detail::parallel_ranges<Partial>(trials, kMinTrialsPerWorker, run, combine);
  if (diag) diag->capped_crosstalk_pulses += result.diag.capped_crosstalk_pulses;
  return result.hist;
}

CountHistogram simulate_dark_histogram(const DetectorConfig& config, std::int64_t trials, std::uint64_t seed,
                                       SimulationDiagnostics* diag) {
  return simulate_histogram(Coherent{0.0}, config, trials, seed, diag);
}

std::vector<double> crosstalk_law(int primaries, const DetectorConfig& config) {
  const double p = config.crosstalk_p;
  if (primaries <= 0 || p == 0.0 || config.crosstalk_mode == CrosstalkMode::off) return {1.0};
  if (config.crosstalk_mode == CrosstalkMode::event_linear) {
    const double q = std::min(1.0, primaries * p);
    return {1.0 - q, q};
  }
  std::vector<double> law(static_cast<std::size_t>(primaries) + 1);
  for (int s = 0; s <= primaries; ++s) {
    law[s] = std::exp(std::lgamma(primaries + 1.0) - std::lgamma(s + 1.0) - std::lgamma(primaries - s + 1.0) +
                      s * std::log(p) + (primaries - s) * std::log1p(-p));
  }
  return law;
}

std::vector<double> occupancy_pmf(int n, int pixels) {
  if (n < 0 || pixels < 1) throw std::invalid_argument("occupancy needs n >= 0 and pixels >= 1");
  const int kmax = std::min(n, pixels);
  std::vector<double> p(static_cast<std::size_t>(kmax) + 1, 0.0);
  p[0] = 1.0;
  const double m = pixels;
  // Photon by photon: it either lands on one of the k fired pixels or opens a new one.
  for (int photon = 1; photon <= n; ++photon) {
    for (int k = std::min(photon, kmax); k >= 1; --k) {
      p[k] = p[k] * (k / m) + p[k - 1] * ((m - (k - 1)) / m);
    }
    p[0] = 0.0;
  }
  return p;
}

HbtCounts simulate_hbt(const PhotonSourceSpec& spec, double eta_apd, std::int64_t trials, std::uint64_t seed) {
  if (trials < 1) throw ConfigError("simulation needs at least one trial");
  if (!(eta_apd >= 0.0 && eta_apd <= 1.0)) throw InvalidSpec("APD efficiency must lie in [0, 1]");
  validate(spec);

  auto run = [&](std::int64_t first, std::int64_t last) {
    PhotonSampler sampler(spec);
    HbtCounts counts;
    std::bernoulli_distribution half(0.5);
    std::bernoulli_distribution detected(eta_apd);
    for (std::int64_t t = first; t < last; ++t) {
      auto source_rng = substream(seed, static_cast<std::uint64_t>(t), Channel::source);
      const std::int64_t n = sampler(source_rng);
      auto rng = substream(seed, static_cast<std::uint64_t>(t), Channel::hbt);
      bool click_1 = false;
      bool click_2 = false;
      for (std::int64_t i = 0; i < n; ++i) {
        const bool arm_1 = half(rng);
        if (!detected(rng)) continue;
        (arm_1 ? click_1 : click_2) = true;
      }
      counts.singles_1 += click_1;
      counts.singles_2 += click_2;
      counts.coincidences += click_1 && click_2;
    }
    counts.trials = last - first;
    return counts;
  };
  auto combine = [](HbtCounts& into, const HbtCounts& from) {
    into.singles_1 += from.singles_1;
    into.singles_2 += from.singles_2;
    into.coincidences += from.coincidences;
    into.trials += from.trials;
  };
  return detail::parallel_ranges<HbtCounts>(trials, kMinTrialsPerWorker, run, combine);
}

}  // namespace mppc
