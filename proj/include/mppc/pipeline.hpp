#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mppc/detector.hpp"
#include "mppc/estimator.hpp"
#include "mppc/fitting.hpp"
#include "mppc/io.hpp"
#include "mppc/sources.hpp"

namespace mppc {

struct RunConfig {
  PhotonSourceSpec source = Coherent{1.0};
  DetectorConfig detector;
  std::int64_t trials = 1'000'000;
  std::int64_t dark_trials = 0;  // 0: same as trials
  std::optional<std::uint64_t> seed;
  /// Mean photons per pulse at the source, one sweep point each.
  std::vector<double> mu_grid;
  EstimatorMode mode = EstimatorMode::exact_m;
  int resamples = 200;
  int order = 2;

  void validate() const;
  std::uint64_t require_seed() const;
};

/// Key-value text: `key = value` per line, `#` starts a comment.
using Settings = std::map<std::string, std::string>;
Settings parse_settings(std::istream& in);
/// Applies settings on top of `base`; unknown keys are a ConfigError.
RunConfig apply_settings(RunConfig base, const Settings& settings);
const std::vector<std::string>& setting_keys();

json to_json(const RunConfig& config);
RunConfig run_config_from_json(const json& j);

struct AmplitudeRecord {
  std::vector<double> amplitudes;
  double unit_amplitude = 1.0;
  std::optional<double> range_max;
};

/// k = floor(a / A0 + 0.5): thresholds midway between peaks, ties round up.
CountHistogram discretize_amplitudes(const AmplitudeRecord& record);

struct SweepPoint {
  double source_mean = 0.0;
  CountHistogram signal;
  CountHistogram dark;  // empty when the detector has no dark counts
  CorrelationEstimate estimate;
  std::int64_t capped_crosstalk_pulses = 0;
};

struct SweepResult {
  RunConfig config;
  std::vector<SweepPoint> points;

  Curve curve() const;
};

/// Per grid point: signal and dark histograms, dark subtraction, g with a
/// bootstrap error. Point i draws from seeds derived from (seed, i).
SweepResult run_sweep(const RunConfig& config);

/// Crosstalk-corrected copy of a measured curve. Each point's mu is moved to
/// the crosstalk-free count scale mu / (1 + P).
Curve correct_curve(const Curve& measured, double p);

struct PipelineReport {
  FitResult calibration;  // crosstalk law on the reference curve
  double crosstalk_p = 0.0;
  Curve reference;
  Curve subject_raw;
  Curve subject_corrected;
  FitResult raw_fit;
  FitResult corrected_fit;
  std::vector<std::string> warnings;
};

PipelineReport run_pipeline(const Curve& reference, const Curve& subject);

json to_json(const PipelineReport& report);
json to_json(const SweepResult& sweep);

}  // namespace mppc
