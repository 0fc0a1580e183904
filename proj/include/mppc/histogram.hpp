#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <vector>

namespace mppc {

/// Tallies N_k of fired-pixel counts k over S trials.
///
/// Raw histograms hold non-negative integral tallies summing to S. A signed
/// histogram (the result of dark subtraction) may hold negative or
/// fractional tallies; its S is the trial count of the signal it came from.
class CountHistogram {
 public:
  CountHistogram() = default;

  /// Raw histogram; checks tallies are non-negative integers summing to trials.
  static CountHistogram raw(std::vector<double> tallies, std::int64_t trials);
  static CountHistogram signed_difference(std::vector<double> tallies, std::int64_t trials);
  /// Raw histogram from the k >= 1 bins; the k = 0 bin takes the remainder.
  static CountHistogram with_implicit_zero(const std::map<int, std::int64_t>& nonzero, std::int64_t trials);

  /// Raw accumulation of one trial with outcome k.
  void record(int k);

  double tally(int k) const { return k >= 0 && k < static_cast<int>(tallies_.size()) ? tallies_[k] : 0.0; }
  int max_k() const { return static_cast<int>(tallies_.size()) - 1; }
  std::int64_t trials() const { return trials_; }
  bool is_signed() const { return signed_; }
  const std::vector<double>& tallies() const { return tallies_; }

  /// Per-pulse frequencies p_k = N_k / S.
  Eigen::ArrayXd frequencies() const;

  /// Sum over trials of k(k-1)...(k-l+1), divided by S. l = 1 gives the mean.
  double factorial_moment(int l) const;

  /// Concatenates two trial sets. Both must be raw.
  CountHistogram& merge(const CountHistogram& other);

  friend bool operator==(const CountHistogram&, const CountHistogram&) = default;

 private:
  CountHistogram(std::vector<double> tallies, std::int64_t trials, bool is_signed);
  void trim();

  std::vector<double> tallies_;
  std::int64_t trials_ = 0;
  bool signed_ = false;
};

CountHistogram merge(CountHistogram a, const CountHistogram& b);

}  // namespace mppc
