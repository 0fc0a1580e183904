#include "mppc/histogram.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mppc/error.hpp"

namespace mppc {

CountHistogram::CountHistogram(std::vector<double> tallies, std::int64_t trials, bool is_signed)
    : tallies_(std::move(tallies)), trials_(trials), signed_(is_signed) {
  trim();
}

void CountHistogram::trim() {
  while (!tallies_.empty() && tallies_.back() == 0.0) tallies_.pop_back();
}

CountHistogram CountHistogram::raw(std::vector<double> tallies, std::int64_t trials) {
  if (trials < 1) throw ConfigError("histogram needs at least one trial");
  double total = 0.0;
  for (double t : tallies) {
    if (!(t >= 0.0) || t != std::floor(t)) throw ConfigError("raw histogram tallies must be non-negative integers");
    total += t;
  }
  if (total != static_cast<double>(trials)) throw ConfigError("raw histogram tallies must sum to the trial count");
  return CountHistogram(std::move(tallies), trials, false);
}

CountHistogram CountHistogram::signed_difference(std::vector<double> tallies, std::int64_t trials) {
  if (trials < 1) throw ConfigError("histogram needs at least one trial");
  for (double t : tallies) {
    if (!std::isfinite(t)) throw ConfigError("histogram tallies must be finite");
  }
  return CountHistogram(std::move(tallies), trials, true);
}

CountHistogram CountHistogram::with_implicit_zero(const std::map<int, std::int64_t>& nonzero, std::int64_t trials) {
  std::vector<double> tallies(1, 0.0);
  std::int64_t used = 0;
  for (const auto& [k, n] : nonzero) {
    if (k < 1 || n < 0) throw ConfigError("implicit-zero histogram takes k >= 1 and non-negative tallies");
    if (static_cast<int>(tallies.size()) <= k) tallies.resize(k + 1, 0.0);
    tallies[k] = static_cast<double>(n);
    used += n;
  }
  if (used > trials) throw ConfigError("tallies exceed the trial count");
  tallies[0] = static_cast<double>(trials - used);
  return raw(std::move(tallies), trials);
}

void CountHistogram::record(int k) {
  if (signed_) throw std::logic_error("cannot record trials into a signed histogram");
  if (static_cast<int>(tallies_.size()) <= k) tallies_.resize(k + 1, 0.0);
  tallies_[k] += 1.0;
  ++trials_;
}

Eigen::ArrayXd CountHistogram::frequencies() const {
  Eigen::ArrayXd p = Eigen::Map<const Eigen::ArrayXd>(tallies_.data(), static_cast<Eigen::Index>(tallies_.size()));
  return p / static_cast<double>(trials_);
}

double CountHistogram::factorial_moment(int l) const {
  double sum = 0.0;
  for (int k = l; k <= max_k(); ++k) {
    double falling = 1.0;
    for (int i = 0; i < l; ++i) falling *= k - i;
    sum += falling * tallies_[k];
  }
  return sum / static_cast<double>(trials_);
}

CountHistogram& CountHistogram::merge(const CountHistogram& other) {
  if (signed_ || other.signed_) throw std::logic_error("only raw histograms can be merged");
  if (tallies_.size() < other.tallies_.size()) tallies_.resize(other.tallies_.size(), 0.0);
  for (std::size_t k = 0; k < other.tallies_.size(); ++k) tallies_[k] += other.tallies_[k];
  trials_ += other.trials_;
  return *this;
}

CountHistogram merge(CountHistogram a, const CountHistogram& b) { return a.merge(b); }

}  // namespace mppc
