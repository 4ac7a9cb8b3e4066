#pragma once

#include <cstdint>
#include <limits>

namespace cqkd {

/// Counter-based per-round random stream.
///
/// The stream for (seed, index) starts from the SplitMix64 state
/// mix(seed ^ mix(index + 0x632be59bd9b4e019)) and advances by the SplitMix64
/// increment.  Doubles are the top 53 bits scaled by 2^-53, so any
/// implementation of the same scheme reproduces the same draws.
class RoundRng {
 public:
  using result_type = std::uint64_t;

  RoundRng(std::uint64_t seed, std::uint64_t index)
      : state_(mix(seed ^ mix(index + 0x632be59bd9b4e019ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Fresh independent stream keyed on this one (used for sub-components).
  RoundRng split(std::uint64_t tag) { return RoundRng((*this)(), tag); }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Draws an index with probability proportional to the non-negative weights.
template <typename Weights>
std::size_t sample_index(const Weights& w, RoundRng& rng) {
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0.0) total += w[i];
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    acc += w[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

}  // namespace cqkd
