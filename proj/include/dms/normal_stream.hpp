#pragma once

#include <cstdint>
#include <vector>

namespace dms {

/// SplitMix64 finalizer.
std::uint64_t splitmix64_mix(std::uint64_t z);

/// Counter-based uniform stream on the open interval (0, 1).
///
/// The stream key is mix(seed ^ mix(tag)); draw i (0-based) is the i-th
/// output of SplitMix64 started from that key, i.e. mix(key + (i + 1) * G)
/// with G = 0x9E3779B97F4A7C15, mapped to ((bits >> 11) + 0.5) * 2^-53.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed, std::uint64_t tag = 0);

  double next();
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Standard-normal deviates by inversion: z = -sqrt(2) * erfc^-1(2u) applied
/// to a UniformStream, so streams are portable across implementations.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed, std::uint64_t tag = 0) : uniform_(seed, tag) {}

  double next();

 private:
  UniformStream uniform_;
};

double inverse_normal_cdf(double u);

std::vector<double> seeded_normal_stream(std::uint64_t seed, std::size_t count,
                                         std::uint64_t tag = 0);

}  // namespace dms
