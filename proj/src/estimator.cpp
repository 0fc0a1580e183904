#include "mppc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "mppc/error.hpp"
#include "mppc/random.hpp"
#include "parallel.hpp"

namespace mppc {

namespace {

constexpr std::int64_t kMinResamplesPerWorker = 64;

template <class Generator>
CountHistogram resample(const CountHistogram& hist, Generator& rng) {
  const auto& tallies = hist.tallies();
  const double total = static_cast<double>(hist.trials());
  std::vector<double> out(tallies.size(), 0.0);
  std::int64_t remaining = hist.trials();
  double mass_left = 1.0;
  for (std::size_t k = 0; k < tallies.size() && remaining > 0; ++k) {
    const double p = tallies[k] / total;
    if (k + 1 == tallies.size() || p >= mass_left) {
      out[k] = static_cast<double>(remaining);
      remaining = 0;
      break;
    }
    std::binomial_distribution<std::int64_t> draw(remaining, std::clamp(p / mass_left, 0.0, 1.0));
    const std::int64_t n = draw(rng);
    out[k] = static_cast<double>(n);
    remaining -= n;
    mass_left -= p;
  }
  return CountHistogram::raw(std::move(out), hist.trials());
}

double sample_std(const std::vector<double>& values) {
  if (values.size() < 2) throw UndefinedCorrelation("too few valid bootstrap resamples");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

template <class Estimate>
double bootstrap(int resamples, Estimate estimate) {
  if (resamples < 100) throw ConfigError("bootstrap needs at least 100 resamples");
  auto run = [&](std::int64_t first, std::int64_t last) {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(last - first));
    for (std::int64_t r = first; r < last; ++r) {
      try {
        values.push_back(estimate(static_cast<std::uint64_t>(r)));
      } catch (const UndefinedCorrelation&) {
        // resample with no counts at all; dropped
      }
    }
    return values;
  };
  auto combine = [](std::vector<double>& into, const std::vector<double>& from) {
    into.insert(into.end(), from.begin(), from.end());
  };
  const auto values = detail::parallel_ranges<std::vector<double>>(resamples, kMinResamplesPerWorker, run, combine);
  if (2 * values.size() < static_cast<std::size_t>(resamples)) {
    throw UndefinedCorrelation("most bootstrap resamples have an undefined correlation");
  }
  return sample_std(values);
}

}  // namespace

std::string to_string(EstimatorMode mode) { return mode == EstimatorMode::exact_m ? "exact_m" : "large_m"; }

EstimatorMode estimator_mode_from_string(const std::string& name) {
  if (name == "exact_m") return EstimatorMode::exact_m;
  if (name == "large_m") return EstimatorMode::large_m;
  throw ConfigError("unknown estimator mode '" + name + "'");
}

CorrelationEstimate g_from_histogram(const CountHistogram& hist, int l, int pixels, EstimatorMode mode) {
  if (l < 2) throw ConfigError("correlation order must be >= 2");
  if (hist.trials() < 1) throw ConfigError("histogram has no trials");
  if (mode == EstimatorMode::exact_m && pixels < l) throw ConfigError("exact_m estimator needs pixels >= order");

  const double mu = hist.factorial_moment(1);
  if (!(mu > 0.0)) throw UndefinedCorrelation("mean count per pulse is not positive");

  double g = hist.factorial_moment(l) / std::pow(mu, l);
  if (mode == EstimatorMode::exact_m) {
    const double m = pixels;
    for (int i = 1; i < l; ++i) g *= m / (m - i);
  }

  CorrelationEstimate out;
  out.order = l;
  out.value = g;
  out.mean_counts = mu;
  out.mode = mode;
  return out;
}

CountHistogram subtract_dark(const CountHistogram& signal, const CountHistogram& dark) {
  if (dark.trials() < 1) throw ConfigError("dark histogram has no trials");
  if (signal.is_signed() || dark.is_signed()) throw ConfigError("dark subtraction takes raw histograms");

  const double scale = static_cast<double>(signal.trials()) / static_cast<double>(dark.trials());
  const int kmax = std::max(signal.max_k(), dark.max_k());
  std::vector<double> out(static_cast<std::size_t>(kmax + 1), 0.0);
  for (int k = 0; k <= kmax; ++k) out[k] = signal.tally(k) - scale * dark.tally(k);
  return CountHistogram::signed_difference(std::move(out), signal.trials());
}

CorrelationEstimate correct_estimate(const CorrelationEstimate& measured, double p) {
  if (measured.order != 2) throw ConfigError("crosstalk correction applies to g^(2) only");
  if (!(measured.mean_counts > 0.0)) throw UndefinedCorrelation("crosstalk correction needs positive mean counts");
  CorrelationEstimate out = measured;
  out.value = correct_g2_crosstalk(measured.value, measured.mean_counts, p);
  out.std_error = measured.std_error * (1.0 + p) * (1.0 + p) / (1.0 + 2.0 * p);
  out.corrected = true;
  out.crosstalk_p = p;
  out.unphysical = out.value < 0.0;
  return out;
}

double bootstrap_std_error(const CountHistogram& hist, int l, int pixels, EstimatorMode mode, int resamples,
                           std::uint64_t seed) {
  if (hist.is_signed()) {
    throw ConfigError("cannot bootstrap a signed histogram; resample the raw signal and dark inputs instead");
  }
  g_from_histogram(hist, l, pixels, mode);  // rejects degenerate input up front
  return bootstrap(resamples, [&](std::uint64_t r) {
    auto rng = substream(seed, r, Channel::bootstrap);
    return g_from_histogram(resample(hist, rng), l, pixels, mode).value;
  });
}

double bootstrap_subtracted_std_error(const CountHistogram& signal, const CountHistogram& dark, int l, int pixels,
                                      EstimatorMode mode, int resamples, std::uint64_t seed) {
  g_from_histogram(subtract_dark(signal, dark), l, pixels, mode);
  return bootstrap(resamples, [&](std::uint64_t r) {
    auto signal_rng = substream(seed, r, Channel::bootstrap);
    auto dark_rng = substream(seed, r, Channel::noise);
    const CountHistogram diff = subtract_dark(resample(signal, signal_rng), resample(dark, dark_rng));
    return g_from_histogram(diff, l, pixels, mode).value;
  });
}

CorrelationEstimate hbt_g2(const HbtCounts& counts) {
  if (counts.trials < 1) throw ConfigError("HBT record has no trials");
  if (counts.singles_1 <= 0 || counts.singles_2 <= 0) throw UndefinedCorrelation("HBT singles must be positive");
  if (counts.coincidences > std::min(counts.singles_1, counts.singles_2) ||
      std::max(counts.singles_1, counts.singles_2) > counts.trials) {
    throw ConfigError("inconsistent HBT counts");
  }

  const double s = static_cast<double>(counts.trials);
  const double p1 = counts.singles_1 / s;
  const double p2 = counts.singles_2 / s;
  // With no coincidences the spread is taken at the one-coincidence level.
  const double pc = std::max<double>(counts.coincidences, 1.0) / s;
  const double g = pc / (p1 * p2);

  // Delta method over the per-trial indicators (c, a1, a2); c implies a1 and a2.
  const double dc = 1.0 / (p1 * p2);
  const double d1 = -g / p1;
  const double d2 = -g / p2;
  const double var = dc * dc * pc * (1.0 - pc) + d1 * d1 * p1 * (1.0 - p1) + d2 * d2 * p2 * (1.0 - p2) +
                     2.0 * dc * d1 * (pc - pc * p1) + 2.0 * dc * d2 * (pc - pc * p2) +
                     2.0 * d1 * d2 * (pc - p1 * p2);

  CorrelationEstimate out;
  out.order = 2;
  out.value = counts.coincidences * s / (static_cast<double>(counts.singles_1) * counts.singles_2);
  out.std_error = std::sqrt(std::max(var, 0.0) / s);
  out.mean_counts = 0.5 * (p1 + p2);
  out.mode = EstimatorMode::large_m;
  return out;
}

}  // namespace mppc
