#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mppc/histogram.hpp"
#include "mppc/random.hpp"
#include "mppc/sources.hpp"

namespace mppc {

enum class CrosstalkMode {
  off,
  // Each fired pixel independently triggers at most one secondary with probability P.
  per_avalanche,
  // A pulse with k fired pixels gains exactly one secondary with probability kP.
  event_linear,
};

std::string to_string(CrosstalkMode mode);
CrosstalkMode crosstalk_mode_from_string(const std::string& name);

/// Gated multi-pixel photon counter. Defaults describe a 400-pixel device at
/// 41% efficiency with 25 kcounts/s dark rate in a 50 ns gate and P = 0.177.
struct DetectorConfig {
  int pixels = 400;
  double efficiency = 0.41;
  double dark_mean = 1.25e-3;  // mean dark avalanches per gate
  double crosstalk_p = 0.177;
  CrosstalkMode crosstalk_mode = CrosstalkMode::event_linear;

  void validate() const;  // throws InvalidSpec
};

/// Scratch set of fired pixels. Clearing costs O(fired), not O(pixels).
class PixelArray {
 public:
  explicit PixelArray(int pixels) : state_(static_cast<std::size_t>(pixels), 0) {}

  int pixels() const { return static_cast<int>(state_.size()); }
  int fired() const { return static_cast<int>(touched_.size()); }
  bool is_fired(int pixel) const { return state_[pixel] != 0; }

  // Returns false when the pixel had already fired.
  bool fire(int pixel) {
    if (state_[pixel]) return false;
    state_[pixel] = 1;
    touched_.push_back(pixel);
    return true;
  }

  void clear() {
    for (int p : touched_) state_[p] = 0;
    touched_.clear();
  }

 private:
  std::vector<std::uint8_t> state_;
  std::vector<int> touched_;
};

/// Random streams of one trial, one per pipeline stage.
struct PulseStreams {
  SplitMix64 detection;
  SplitMix64 dark;
  SplitMix64 crosstalk;

  static PulseStreams for_trial(std::uint64_t seed, std::uint64_t trial) {
    return {substream(seed, trial, Channel::detection), substream(seed, trial, Channel::dark),
            substream(seed, trial, Channel::crosstalk)};
  }
};

struct PulseOutcome {
  int fired = 0;
  // event_linear only: kP exceeded 1 and the secondary probability was capped.
  bool crosstalk_capped = false;
};

/// One gate: Bernoulli loss, uniform pixel assignment with merging, Poisson
/// dark avalanches, then crosstalk onto unfired pixels (secondaries never
/// trigger further secondaries).
PulseOutcome detect_one_pulse(std::int64_t n_photons, const DetectorConfig& config, PulseStreams& streams,
                              PixelArray& scratch);

/// Exact distribution of the number of secondary avalanches seeded by
/// `primaries` fired pixels; index = number of secondaries. Placement on free
/// pixels never merges, so k' = k + secondaries whenever pixels remain.
std::vector<double> crosstalk_law(int primaries, const DetectorConfig& config);

/// Counts of event_linear pulses whose crosstalk probability had to be capped.
struct SimulationDiagnostics {
  std::int64_t capped_crosstalk_pulses = 0;
};

/// Trials [first, last) of the run identified by seed. Ranges merge to the
/// histogram of their union.
CountHistogram simulate_trial_range(const PhotonSourceSpec& spec, const DetectorConfig& config, std::uint64_t seed,
                                    std::int64_t first, std::int64_t last, SimulationDiagnostics* diag = nullptr);

CountHistogram simulate_histogram(const PhotonSourceSpec& spec, const DetectorConfig& config, std::int64_t trials,
                                  std::uint64_t seed, SimulationDiagnostics* diag = nullptr);

/// No light; dark avalanches still produce crosstalk.
CountHistogram simulate_dark_histogram(const DetectorConfig& config, std::int64_t trials, std::uint64_t seed,
                                       SimulationDiagnostics* diag = nullptr);

/// Exact distribution of fired pixels when n photons land uniformly on m
/// pixels (no loss, dark counts or crosstalk).
std::vector<double> occupancy_pmf(int n, int pixels);

struct HbtCounts {
  std::int64_t singles_1 = 0;
  std::int64_t singles_2 = 0;
  std::int64_t coincidences = 0;
  std::int64_t trials = 0;

  friend bool operator==(const HbtCounts&, const HbtCounts&) = default;
};

/// 50/50 splitter followed by two binary detectors of efficiency eta_apd.
HbtCounts simulate_hbt(const PhotonSourceSpec& spec, double eta_apd, std::int64_t trials, std::uint64_t seed);

}  // namespace mppc
