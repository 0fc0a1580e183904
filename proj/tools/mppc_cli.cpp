// Command-line front end: simulate, sweep, estimate, fit, pipeline, discretize.
//
// Exit codes: 0 success, 1 configuration / input error, 2 numeric failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "mppc/error.hpp"
#include "mppc/io.hpp"
#include "mppc/pipeline.hpp"

namespace {

using namespace mppc;

constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;

// Config file plus one `--<key>` flag per setting; flags win over the file.
struct SettingOptions {
  std::string config_path;
  std::map<std::string, std::string> flags;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value settings file");
    for (const auto& key : setting_keys()) app->add_option("--" + key, flags[key], "setting '" + key + "'");
  }

  RunConfig resolve(CLI::App* app) const {
    Settings settings;
    if (!config_path.empty()) {
      std::istringstream in(read_text_file(config_path));
      settings = parse_settings(in);
    }
    for (const auto& key : setting_keys()) {
      if (app->count("--" + key) > 0) settings[key] = flags.at(key);
    }
    return apply_settings(RunConfig{}, settings);
  }
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

std::string curve_text(const Curve& curve) {
  std::ostringstream out;
  write_curve_csv(out, curve);
  return out.str();
}

Curve load_curve(const std::string& path) {
  std::istringstream in(read_text_file(path));
  return read_curve_csv(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon-number-resolving multi-pixel counter: simulation and g^(l) estimation"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Simulate one fired-pixel histogram");
  SettingOptions simulate_settings;
  simulate_settings.attach(simulate);
  bool simulate_dark = false;
  std::string simulate_out;
  simulate->add_flag("--dark", simulate_dark, "Dark histogram (no light)");
  simulate->add_option("--out", simulate_out, "Histogram CSV; sidecar goes to <out>.meta.json")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Intensity sweep of dark-subtracted g estimates");
  SettingOptions sweep_settings;
  sweep_settings.attach(sweep);
  std::string sweep_out;
  std::string sweep_report;
  sweep->add_option("--out", sweep_out, "Curve CSV")->required();
  sweep->add_option("--report", sweep_report, "JSON report with config and per-point detail");

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Estimate g^(l) from a histogram file");
  std::string est_hist;
  std::string est_dark;
  std::string est_out;
  int est_order = 2;
  int est_pixels = 400;
  std::string est_mode = "exact_m";
  int est_resamples = 200;
  std::uint64_t est_seed = 1;
  double est_correct_p = 0.0;
  estimate->add_option("--hist", est_hist, "Histogram CSV")->required();
  estimate->add_option("--dark", est_dark, "Dark histogram CSV to subtract");
  estimate->add_option("--order", est_order, "Correlation order l")->check(CLI::Range(2, 64));
  estimate->add_option("--pixels", est_pixels, "Pixel count m");
  estimate->add_option("--mode", est_mode, "exact_m | large_m");
  estimate->add_option("--resamples", est_resamples, "Bootstrap resamples (>= 100)");
  estimate->add_option("--seed", est_seed, "Bootstrap seed");
  auto* correct_opt = estimate->add_option("--correct-p", est_correct_p, "Remove first-order crosstalk with this P");
  estimate->add_option("--out", est_out, "Estimate JSON (default stdout)");

  // fit
  auto* fit = app.add_subcommand("fit", "Weighted Levenberg-Marquardt fit of a curve");
  std::string fit_curve;
  std::string fit_model = "hyperbola";
  std::string fit_out;
  fit->add_option("--curve", fit_curve, "Curve CSV")->required();
  fit->add_option("--model", fit_model, "hyperbola | crosstalk_ref");
  fit->add_option("--out", fit_out, "Fit JSON (default stdout)");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Calibrate P on a reference curve and correct a subject curve");
  SettingOptions pipeline_settings;
  pipeline_settings.attach(pipeline);
  std::string pipe_reference;
  std::string pipe_subject;
  std::string pipe_out;
  std::string pipe_corrected;
  pipeline->add_option("--reference", pipe_reference, "Reference (coherent) curve CSV");
  pipeline->add_option("--subject", pipe_subject, "Subject curve CSV");
  pipeline->add_option("--out", pipe_out, "Report JSON (default stdout)");
  pipeline->add_option("--corrected-curve", pipe_corrected, "Corrected subject curve CSV");

  // discretize
  auto* discretize = app.add_subcommand("discretize", "Bin pulse amplitudes into a fired-pixel histogram");
  std::string disc_input;
  double disc_unit = 0.0;
  double disc_range = 0.0;
  std::string disc_out;
  discretize->add_option("--input", disc_input, "Amplitude CSV")->required();
  discretize->add_option("--unit", disc_unit, "Single-pixel amplitude A0")->required();
  auto* range_opt = discretize->add_option("--range-max", disc_range, "Declared upper amplitude limit");
  discretize->add_option("--out", disc_out, "Histogram CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (simulate->parsed()) {
      const RunConfig config = simulate_settings.resolve(simulate);
      const std::uint64_t seed = config.require_seed();
      SimulationDiagnostics diag;
      const CountHistogram hist =
          simulate_dark ? simulate_dark_histogram(config.detector, config.trials, seed, &diag)
                        : simulate_histogram(config.source, config.detector, config.trials, seed, &diag);
      json meta;
      meta["command"] = simulate_dark ? "simulate --dark" : "simulate";
      meta["config"] = to_json(config);
      meta["seed"] = seed;
      meta["capped_crosstalk_pulses"] = diag.capped_crosstalk_pulses;
      if (diag.capped_crosstalk_pulses > 0) {
        meta["warning"] = "event_linear: k*P > 1 in some pulses; crosstalk probability capped at 1";
        std::cerr << "warning: " << diag.capped_crosstalk_pulses << " pulses had k*P > 1\n";
      }
      save_histogram(simulate_out, hist, meta);
    } else if (sweep->parsed()) {
      const RunConfig config = sweep_settings.resolve(sweep);
      const SweepResult result = run_sweep(config);
      emit(sweep_out, curve_text(result.curve()));
      const json report = to_json(result);
      for (const auto& w : report.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << '\n';
      if (!sweep_report.empty()) emit(sweep_report, report.dump(2) + "\n");
    } else if (estimate->parsed()) {
      const EstimatorMode mode = estimator_mode_from_string(est_mode);
      const CountHistogram signal = load_histogram(est_hist);
      CorrelationEstimate result;
      if (est_dark.empty()) {
        result = g_from_histogram(signal, est_order, est_pixels, mode);
        if (!signal.is_signed()) {
          result.std_error = bootstrap_std_error(signal, est_order, est_pixels, mode, est_resamples, est_seed);
        }
      } else {
        const CountHistogram dark = load_histogram(est_dark);
        result = g_from_histogram(subtract_dark(signal, dark), est_order, est_pixels, mode);
        result.std_error =
            bootstrap_subtracted_std_error(signal, dark, est_order, est_pixels, mode, est_resamples, est_seed);
      }
      if (correct_opt->count() > 0) {
        result = correct_estimate(result, est_correct_p);
        if (result.unphysical) std::cerr << "warning: corrected g is negative (over-correction)\n";
      }
      json j = to_json(result);
      j["inputs"] = {{"hist", est_hist}, {"dark", est_dark}, {"pixels", est_pixels}, {"seed", est_seed},
                     {"resamples", est_resamples}};
      emit(est_out, j.dump(2) + "\n");
    } else if (fit->parsed()) {
      const Curve curve = load_curve(fit_curve);
      const FitResult result = lm_fit(curve_model_from_string(fit_model), curve);
      json j = to_json(result);
      j["inputs"] = {{"curve", fit_curve}};
      if (!result.converged) std::cerr << "warning: fit did not converge\n";
      emit(fit_out, j.dump(2) + "\n");
    } else if (pipeline->parsed()) {
      json provenance;
      Curve reference;
      Curve subject;
      if (!pipe_reference.empty() || !pipe_subject.empty()) {
        if (pipe_reference.empty() || pipe_subject.empty()) {
          throw ConfigError("pipeline needs both --reference and --subject curves");
        }
        reference = load_curve(pipe_reference);
        subject = load_curve(pipe_subject);
        provenance = {{"reference", pipe_reference}, {"subject", pipe_subject}};
      } else {
        // Simulated run: coherent reference and the configured subject share detector and grid.
        const RunConfig subject_config = pipeline_settings.resolve(pipeline);
        RunConfig reference_config = subject_config;
        reference_config.source = Coherent{1.0};
        reference_config.seed = derive_seed(subject_config.require_seed(), 0x5EF);
        reference = run_sweep(reference_config).curve();
        subject = run_sweep(subject_config).curve();
        provenance = {{"subject_config", to_json(subject_config)}, {"reference_config", to_json(reference_config)},
                      {"seed", subject_config.require_seed()}};
      }
      const PipelineReport report = run_pipeline(reference, subject);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
      json j = to_json(report);
      j["provenance"] = provenance;
      emit(pipe_out, j.dump(2) + "\n");
      if (!pipe_corrected.empty()) emit(pipe_corrected, curve_text(report.subject_corrected));
    } else if (discretize->parsed()) {
      AmplitudeRecord record;
      std::istringstream in(read_text_file(disc_input));
      record.amplitudes = read_amplitude_csv(in);
      record.unit_amplitude = disc_unit;
      if (range_opt->count() > 0) record.range_max = disc_range;
      const CountHistogram hist = discretize_amplitudes(record);
      json meta;
      meta["command"] = "discretize";
      meta["input"] = disc_input;
      meta["unit_amplitude"] = disc_unit;
      meta["binning"] = "k = floor(a / A0 + 0.5); thresholds midway between peaks, ties round up";
      save_histogram(disc_out, hist, meta);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
