#pragma once

#include <cstdint>
#include <limits>

namespace mppc {

/// SplitMix64 bit generator. Satisfies UniformRandomBitGenerator so it can
/// drive the <random> distributions.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t state = 0) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Independent random channels within one trial. Keeping them apart means a
/// change in one stage (say, switching dark counts on) leaves the draws of
/// every other stage of that trial untouched.
enum class Channel : std::uint64_t {
  source = 1,
  detection = 2,
  dark = 3,
  crosstalk = 4,
  hbt = 5,
  bootstrap = 6,
  noise = 7,
};

/// Stream-splitting rule: the generator for (seed, index, channel) starts at
///   mix(mix(seed) + mix(8 * index + channel)) ^ channel-salt.
/// Every trial (or bootstrap resample) owns its own streams, so results do not
/// depend on how a trial range is partitioned among workers.
constexpr SplitMix64 substream(std::uint64_t seed, std::uint64_t index, Channel channel) {
  const auto c = static_cast<std::uint64_t>(channel);
  const std::uint64_t key =
      SplitMix64::mix(SplitMix64::mix(seed) + SplitMix64::mix(8 * index + c + 0x632BE59BD9B4E019ULL));
  return SplitMix64(key ^ (c * 0xD6E8FEB86659FD93ULL));
}

/// Derive a child seed, e.g. one per sweep point.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return SplitMix64::mix(SplitMix64::mix(seed ^ 0xA0761D6478BD642FULL) + tag);
}

}  // namespace mppc
