#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mppc/detector.hpp"
#include "mppc/histogram.hpp"

namespace mppc {

enum class EstimatorMode {
  exact_m,  // finite-pixel normalization m^l / (l! C(m, l))
  large_m,
};

std::string to_string(EstimatorMode mode);
EstimatorMode estimator_mode_from_string(const std::string& name);

struct CorrelationEstimate {
  int order = 2;
  double value = 0.0;
  double std_error = 0.0;
  double mean_counts = 0.0;  // mean fired pixels per pulse of the source histogram
  EstimatorMode mode = EstimatorMode::exact_m;
  bool corrected = false;
  std::optional<double> crosstalk_p;  // P used for the correction
  bool unphysical = false;            // correction drove the value below zero
};

/// g^(l) from a histogram with per-pulse normalization p_k = N_k / S:
///   large_m: sum_k (k)_l p_k / mu^l
///   exact_m: the same times prod_{i<l} m / (m - i)
/// Throws UndefinedCorrelation when sum_k k N_k <= 0.
CorrelationEstimate g_from_histogram(const CountHistogram& hist, int l, int pixels,
                                     EstimatorMode mode = EstimatorMode::exact_m);

/// Bin-wise signal - (S_signal / S_dark) dark. The result is signed.
CountHistogram subtract_dark(const CountHistogram& signal, const CountHistogram& dark);

/// Expected g^(2) of the photocounts after first-order crosstalk, with mu_ct
/// the mean photocounts per pulse measured with crosstalk present.
template <typename Scalar>
Scalar predict_g2_crosstalk(Scalar g0, Scalar mu_ct, Scalar p) {
  const Scalar one(1);
  const Scalar two(2);
  return (one + two * p) / ((one + p) * (one + p)) * g0 + two * p / ((one + p) * mu_ct);
}

/// Algebraic inverse of predict_g2_crosstalk.
template <typename Scalar>
Scalar correct_g2_crosstalk(Scalar g_measured, Scalar mu_ct, Scalar p) {
  const Scalar one(1);
  const Scalar two(2);
  return (g_measured - two * p / ((one + p) * mu_ct)) * ((one + p) * (one + p)) / (one + two * p);
}

/// Applies correct_g2_crosstalk to a measured estimate; std_error is scaled
/// by the same normalization, mean_counts is kept as measured.
CorrelationEstimate correct_estimate(const CorrelationEstimate& measured, double p);

/// Standard deviation of g over multinomial resamples of the S trials.
/// Raw histograms only; see bootstrap_subtracted_std_error for signed ones.
double bootstrap_std_error(const CountHistogram& hist, int l, int pixels, EstimatorMode mode, int resamples,
                           std::uint64_t seed);

/// Resamples signal and dark independently, subtracts, and estimates.
double bootstrap_subtracted_std_error(const CountHistogram& signal, const CountHistogram& dark, int l, int pixels,
                                      EstimatorMode mode, int resamples, std::uint64_t seed);

/// g = C S / (s1 s2) with delta-method (multinomial) standard error. Valid
/// when singles are rare compared with trials.
CorrelationEstimate hbt_g2(const HbtCounts& counts);

}  // namespace mppc
