#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dms/domain.hpp"

namespace dms {

/// Time-domain bias input V_t in volts. One of
///  - constant v
///  - piecewise constant: values[i] on [times[i], times[i+1]), values.front()
///    before times.front() and values.back() after times.back()
///  - sinusoid offset + amplitude * cos(2 pi f t)
///  - affine a + k * inner
/// Every signal carries a declared DomainBounds that contains its range.
class BiasSignal {
 public:
  static BiasSignal constant(double v);
  static BiasSignal piecewise(std::vector<double> times, std::vector<double> values);
  /// Zero-order hold of samples[j] on [t0 + j Ts, t0 + (j + 1) Ts).
  static BiasSignal zoh(std::vector<double> samples, double Ts, double t0 = 0.0);
  static BiasSignal sinusoid(double offset, double amplitude, double frequency);
  static BiasSignal affine(double a, double k, const BiasSignal& inner);

  double operator()(double t) const;

  /// Exact range of values taken over all t.
  DomainBounds range() const;
  const DomainBounds& domain() const { return domain_; }
  /// Copy with a wider declared domain; throws if the range is not contained.
  BiasSignal with_domain(const DomainBounds& D) const;

  bool is_piecewise_constant() const;
  /// First discontinuity strictly after t, or +inf. Piecewise signals only.
  double next_change_after(double t) const;
  /// Sinusoid period (affine passes through); nullopt otherwise.
  std::optional<double> period() const;
  /// Sample period of a signal built by zoh().
  std::optional<double> sample_period() const;

 private:
  struct Constant {
    double v;
  };
  struct Piecewise {
    std::vector<double> times, values;
    std::optional<double> Ts;
  };
  struct Sinusoid {
    double offset, amplitude, frequency;
  };
  struct Affine {
    double a, k;
    std::shared_ptr<const BiasSignal> inner;
  };
  using Kind = std::variant<Constant, Piecewise, Sinusoid, Affine>;

  explicit BiasSignal(Kind kind);

  std::shared_ptr<const Kind> kind_;
  DomainBounds domain_;
};

/// Signal from a JSON object with "kind" in {constant, piecewise, zoh,
/// sinusoid, affine} and an optional "domain": [a, b]. A zoh signal may read
/// its samples from "file" (CSV with a "V" column and a "# Ts=<seconds>"
/// header line), resolved relative to base_dir. Unknown keys are rejected.
BiasSignal signal_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

}  // namespace dms
