#pragma once

#include <cmath>
#include <string>

#include "dms/error.hpp"

namespace dms {

/// Compact bias interval [a, b] in volts. a == b is accepted as a degenerate
/// single-point domain.
struct DomainBounds {
  double a = 0.0;
  double b = 0.0;

  DomainBounds() = default;
  DomainBounds(double lo, double hi) : a(lo), b(hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
      throw InvalidArgument("DomainBounds requires finite a <= b, got [" + std::to_string(lo) +
                            ", " + std::to_string(hi) + "]");
    }
  }

  double width() const { return b - a; }
  bool contains(double v, double slack = 0.0) const { return v >= a - slack && v <= b + slack; }
  bool contains(const DomainBounds& other, double slack = 0.0) const {
    return other.a >= a - slack && other.b <= b + slack;
  }
  bool operator==(const DomainBounds&) const = default;
};

}  // namespace dms
