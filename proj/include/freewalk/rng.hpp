#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

namespace freewalk {

/// Counter-based SplitMix64 stream.
///
/// Output n of stream (seed, stream) is mix(key + (n + 1) * kGamma), where
/// key = mix(seed + (stream + 1) * kStreamGamma) and mix is the SplitMix64
/// finalizer:
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   z =  z ^ (z >> 31)
/// Uniform doubles take the top 53 bits: (x >> 11) * 2^-53. All arithmetic
/// is mod 2^64, so the sequence is identical on every platform.
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kStreamGamma = 0xD1B54A32D192ED03ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(mix(seed + (stream + 1) * kStreamGamma)) {}

  std::uint64_t next() noexcept { return mix(key_ + (++counter_) * kGamma); }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Inverse-CDF sampler over a finite set of outcomes.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  explicit DiscreteSampler(std::span<const double> weights) {
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      total += weights[i];
      cdf_.push_back(total);
      outcome_.push_back(i);
    }
    for (double& c : cdf_) c /= total;
  }

  std::size_t operator()(CounterRng& rng) const {
    double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return outcome_[static_cast<std::size_t>(it - cdf_.begin())];
  }

  bool empty() const noexcept { return cdf_.empty(); }

 private:
  std::vector<double> cdf_;
  std::vector<std::size_t> outcome_;
};

}  // namespace freewalk
