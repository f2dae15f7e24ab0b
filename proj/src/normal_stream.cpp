#include "dms/normal_stream.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "dms/error.hpp"

namespace dms {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

UniformStream::UniformStream(std::uint64_t seed, std::uint64_t tag)
    : key_(splitmix64_mix(seed ^ splitmix64_mix(tag + kGolden))) {}

double UniformStream::next() {
  ++counter_;
  const std::uint64_t bits = splitmix64_mix(key_ + counter_ * kGolden);
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double inverse_normal_cdf(double u) {
  if (!(u > 0.0 && u < 1.0)) throw InvalidArgument("inverse_normal_cdf: u must lie in (0, 1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

double NormalStream::next() { return inverse_normal_cdf(uniform_.next()); }

std::vector<double> seeded_normal_stream(std::uint64_t seed, std::size_t count,
                                         std::uint64_t tag) {
  NormalStream stream(seed, tag);
  std::vector<double> out(count);
  for (auto& z : out) z = stream.next();
  return out;
}

}  // namespace dms
