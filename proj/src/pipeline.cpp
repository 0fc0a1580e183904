#include "mppc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include "mppc/error.hpp"
#include "mppc/random.hpp"

namespace mppc {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double number_setting(const std::string& key, const std::string& value) {
  try {
    return parse_number(value);
  } catch (const IngestionError&) {
    throw ConfigError("setting '" + key + "' expects a number, got '" + value + "'");
  }
}

std::int64_t integer_setting(const std::string& key, const std::string& value) {
  const double x = number_setting(key, value);
  if (x != std::floor(x) || std::abs(x) > 9.0e15) throw ConfigError("setting '" + key + "' expects an integer");
  return static_cast<std::int64_t>(x);
}

std::uint64_t seed_setting(const std::string& value) {
  const std::string t = trim(value);
  std::uint64_t seed = 0;
  std::istringstream in(t);
  if (t.empty() || t.front() == '-' || !(in >> seed) || !in.eof()) {
    throw ConfigError("seed must be a non-negative integer, got '" + value + "'");
  }
  return seed;
}

json curve_json(const Curve& curve) {
  json arr = json::array();
  for (const CurvePoint& pt : curve) {
    arr.push_back({{"mu", pt.mu}, {"g", pt.g}, {"sigma", pt.sigma}, {"corrected", pt.corrected}});
  }
  return arr;
}

}  // namespace

void RunConfig::validate() const {
  mppc::validate(source);
  detector.validate();
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (dark_trials < 0) throw ConfigError("dark_trials must be >= 0");
  if (order < 2) throw ConfigError("order must be >= 2");
  if (resamples < 100) throw ConfigError("resamples must be >= 100");
  for (std::size_t i = 0; i < mu_grid.size(); ++i) {
    if (!(mu_grid[i] > 0.0)) throw ConfigError("mu_grid entries must be positive");
    if (i > 0 && !(mu_grid[i] > mu_grid[i - 1])) throw ConfigError("mu_grid must be strictly ascending");
  }
}

std::uint64_t RunConfig::require_seed() const {
  if (!seed) throw ConfigError("a seed is required for simulation");
  return *seed;
}

Settings parse_settings(std::istream& in) {
  Settings settings;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(row) + ": expected key = value");
    settings[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return settings;
}

const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys = {
      "source",      "mu",           "mu_pairs", "r",           "modes",  "pixels",
      "efficiency",  "dark_mean",    "crosstalk_p", "crosstalk_mode", "trials", "dark_trials",
      "seed",        "mu_grid",      "mode",     "resamples",   "order",
  };
  return keys;
}

RunConfig apply_settings(RunConfig config, const Settings& settings) {
  for (const auto& [key, value] : settings) {
    if (std::find(setting_keys().begin(), setting_keys().end(), key) == setting_keys().end()) {
      throw ConfigError("unknown setting '" + key + "'");
    }
  }

  json source = to_json(config.source);
  if (auto it = settings.find("source"); it != settings.end() && it->second != source.at("kind")) {
    source = json{{"kind", it->second}};
  }
  for (const char* key : {"mu", "mu_pairs", "r"}) {
    if (auto it = settings.find(key); it != settings.end()) source[key] = number_setting(key, it->second);
  }
  if (auto it = settings.find("modes"); it != settings.end()) source["modes"] = integer_setting("modes", it->second);
  const std::string kind = source.at("kind").get<std::string>();
  if ((kind == "coherent" || kind == "thermal") && !source.contains("mu")) source["mu"] = 1.0;
  if ((kind == "twin_beam_signal" || kind == "squeezed_supermode") && !source.contains("mu_pairs")) {
    source["mu_pairs"] = 0.5;
  }
  if (kind == "squeezed_exact" && !source.contains("r")) source["r"] = 0.5;
  config.source = source_from_json(source);

  for (const auto& [key, value] : settings) {
    if (key == "pixels") config.detector.pixels = static_cast<int>(integer_setting(key, value));
    if (key == "efficiency") config.detector.efficiency = number_setting(key, value);
    if (key == "dark_mean") config.detector.dark_mean = number_setting(key, value);
    if (key == "crosstalk_p") config.detector.crosstalk_p = number_setting(key, value);
    if (key == "crosstalk_mode") config.detector.crosstalk_mode = crosstalk_mode_from_string(value);
    if (key == "trials") config.trials = integer_setting(key, value);
    if (key == "dark_trials") config.dark_trials = integer_setting(key, value);
    if (key == "seed") config.seed = seed_setting(value);
    if (key == "mode") config.mode = estimator_mode_from_string(value);
    if (key == "resamples") config.resamples = static_cast<int>(integer_setting(key, value));
    if (key == "order") config.order = static_cast<int>(integer_setting(key, value));
    if (key == "mu_grid") {
      config.mu_grid.clear();
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!trim(item).empty()) config.mu_grid.push_back(number_setting(key, item));
      }
    }
  }
  config.validate();
  return config;
}

json to_json(const RunConfig& config) {
  json j;
  j["source"] = to_json(config.source);
  j["detector"] = to_json(config.detector);
  j["trials"] = config.trials;
  j["dark_trials"] = config.dark_trials;
  j["seed"] = config.seed ? json(*config.seed) : json(nullptr);
  j["mu_grid"] = config.mu_grid;
  j["mode"] = to_string(config.mode);
  j["resamples"] = config.resamples;
  j["order"] = config.order;
  return j;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig config;
  config.source = source_from_json(j.at("source"));
  config.detector = detector_from_json(j.at("detector"));
  config.trials = j.at("trials").get<std::int64_t>();
  config.dark_trials = j.value("dark_trials", std::int64_t{0});
  if (j.contains("seed") && !j.at("seed").is_null()) config.seed = j.at("seed").get<std::uint64_t>();
  config.mu_grid = j.value("mu_grid", std::vector<double>{});
  config.mode = estimator_mode_from_string(j.value("mode", std::string("exact_m")));
  config.resamples = j.value("resamples", 200);
  config.order = j.value("order", 2);
  config.validate();
  return config;
}

CountHistogram discretize_amplitudes(const AmplitudeRecord& record) {
  if (!(record.unit_amplitude > 0.0)) throw ConfigError("unit amplitude must be positive");
  if (record.amplitudes.empty()) throw IngestionError("amplitude record is empty");
  CountHistogram hist;
  for (std::size_t i = 0; i < record.amplitudes.size(); ++i) {
    const double a = record.amplitudes[i];
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw IngestionError("amplitude must be finite and non-negative", static_cast<long long>(i));
    }
    if (record.range_max && a > *record.range_max) {
      throw IngestionError("amplitude exceeds the declared range", static_cast<long long>(i));
    }
    hist.record(static_cast<int>(std::floor(a / record.unit_amplitude + 0.5)));
  }
  return hist;
}

Curve SweepResult::curve() const {
  Curve out;
  out.reserve(points.size());
  for (const SweepPoint& p : points) {
    out.push_back({p.estimate.mean_counts, p.estimate.value, p.estimate.std_error, p.estimate.corrected});
  }
  return out;
}

SweepResult run_sweep(const RunConfig& config) {
  config.validate();
  if (config.mu_grid.empty()) throw ConfigError("mu_grid is empty");
  const std::uint64_t seed = config.require_seed();
  const std::int64_t dark_trials = config.dark_trials > 0 ? config.dark_trials : config.trials;
  const DetectorConfig& det = config.detector;

  SweepResult result;
  result.config = config;
  for (std::size_t i = 0; i < config.mu_grid.size(); ++i) {
    const std::uint64_t point_seed = derive_seed(seed, i);
    SweepPoint point;
    point.source_mean = config.mu_grid[i];
    const PhotonSourceSpec spec = with_mean_photons(config.source, point.source_mean);

    SimulationDiagnostics diag;
    point.signal = simulate_histogram(spec, det, config.trials, derive_seed(point_seed, 1), &diag);
    const std::uint64_t bootstrap_seed = derive_seed(point_seed, 3);
    if (det.dark_mean > 0.0) {
      point.dark = simulate_dark_histogram(det, dark_trials, derive_seed(point_seed, 2), &diag);
      point.estimate = g_from_histogram(subtract_dark(point.signal, point.dark), config.order, det.pixels, config.mode);
      point.estimate.std_error = bootstrap_subtracted_std_error(point.signal, point.dark, config.order, det.pixels,
                                                                config.mode, config.resamples, bootstrap_seed);
    } else {
      point.estimate = g_from_histogram(point.signal, config.order, det.pixels, config.mode);
      point.estimate.std_error =
          bootstrap_std_error(point.signal, config.order, det.pixels, config.mode, config.resamples, bootstrap_seed);
    }
    point.capped_crosstalk_pulses = diag.capped_crosstalk_pulses;
    result.points.push_back(std::move(point));
  }
  return result;
}

Curve correct_curve(const Curve& measured, double p) {
  Curve out;
  out.reserve(measured.size());
  for (const CurvePoint& pt : measured) {
    if (pt.corrected) throw ConfigError("curve is already crosstalk-corrected");
    CurvePoint c;
    c.g = correct_g2_crosstalk(pt.g, pt.mu, p);
    c.sigma = pt.sigma * (1.0 + p) * (1.0 + p) / (1.0 + 2.0 * p);
    c.mu = pt.mu / (1.0 + p);
    c.corrected = true;
    out.push_back(c);
  }
  return out;
}

PipelineReport run_pipeline(const Curve& reference, const Curve& subject) {
  PipelineReport report;
  report.reference = reference;
  report.subject_raw = subject;

  report.calibration = lm_fit(CurveModel::crosstalk_ref, reference);
  report.crosstalk_p = report.calibration.params(0);
  if (!report.calibration.converged) report.warnings.push_back("crosstalk calibration fit did not converge");
  if (!(report.crosstalk_p >= 0.0 && report.crosstalk_p < 1.0)) {
    throw DegenerateFit("calibrated crosstalk probability outside [0, 1)");
  }

  report.subject_corrected = correct_curve(subject, report.crosstalk_p);
  for (std::size_t i = 0; i < report.subject_corrected.size(); ++i) {
    if (report.subject_corrected[i].g < 0.0) {
      report.warnings.push_back("corrected point " + std::to_string(i) + " is negative (over-correction)");
    }
  }

  report.raw_fit = lm_fit(CurveModel::hyperbola, report.subject_raw);
  report.corrected_fit = lm_fit(CurveModel::hyperbola, report.subject_corrected);
  if (!report.raw_fit.converged) report.warnings.push_back("raw subject fit did not converge");
  if (!report.corrected_fit.converged) report.warnings.push_back("corrected subject fit did not converge");
  return report;
}

json to_json(const PipelineReport& report) {
  json j;
  j["crosstalk_p"] = report.crosstalk_p;
  j["crosstalk_p_std_error"] = report.calibration.std_errors(0);
  j["calibration_fit"] = to_json(report.calibration);
  j["subject_raw_fit"] = to_json(report.raw_fit);
  j["subject_corrected_fit"] = to_json(report.corrected_fit);
  j["curves"] = {{"reference", curve_json(report.reference)},
                 {"subject_raw", curve_json(report.subject_raw)},
                 {"subject_corrected", curve_json(report.subject_corrected)}};
  j["corrected_mu_scale"] = "mu / (1 + P)";
  j["warnings"] = report.warnings;
  return j;
}

json to_json(const SweepResult& sweep) {
  json j;
  j["config"] = to_json(sweep.config);
  json points = json::array();
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    const SweepPoint& p = sweep.points[i];
    points.push_back({{"source_mean", p.source_mean},
                      {"estimate", to_json(p.estimate)},
                      {"capped_crosstalk_pulses", p.capped_crosstalk_pulses}});
    if (p.capped_crosstalk_pulses > 0) {
      warnings.push_back("point " + std::to_string(i) + ": " + std::to_string(p.capped_crosstalk_pulses) +
                         " pulses had k*P > 1; crosstalk probability capped at 1");
    }
  }
  j["points"] = points;
  j["warnings"] = warnings;
  return j;
}

}  // namespace mppc
