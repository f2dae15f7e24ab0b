#pragma once

#include <functional>
#include <optional>
#include <string>

namespace dms {

/// Continuous weighting w(tau) on tau <= 0 with values in (0, 1] decaying to
/// 0 at -inf. Construction validates these properties on a probe grid.
class WeightingFunction {
 public:
  /// w = e^{beta tau}, beta > 0.
  static WeightingFunction exponential(double beta);
  /// w = max{1, |tau|} e^{a tau} / s with s its supremum on tau <= 0, a > 0.
  static WeightingFunction polynomial_exponential(double a);
  /// Arbitrary weighting; validated on the probe grid.
  static WeightingFunction custom(std::function<double(double)> w, std::string name);

  double operator()(double tau) const;
  /// sup of w over [lo, hi] (lo may be -inf), hi <= 0.
  double sup_on(double lo, double hi) const;
  const std::string& name() const { return name_; }

 private:
  enum class Family { exponential, polynomial_exponential, custom };
  WeightingFunction(Family f, double rate, double scale, std::function<double(double)> w,
                    std::string name);
  Family family_;
  double rate_;
  double scale_;
  std::function<double(double)> w_;
  std::string name_;
};

/// Discrete weighting w_k on k <= 0 with values in (0, 1] decaying to 0.
class WeightingSequence {
 public:
  /// w_k = e^{-b Ts |k|}, b > 0.
  static WeightingSequence exponential(double b, double Ts);
  /// w_k = max{1, |k|} e^{-a Ts |k|} / s with s the supremum over k <= 0.
  static WeightingSequence polynomial_exponential(double a, double Ts);
  static WeightingSequence custom(std::function<double(long)> w, std::string name);

  double operator()(long k) const { return w_(k); }
  const std::string& name() const { return name_; }

 private:
  WeightingSequence(std::function<double(long)> w, std::string name);
  std::function<double(long)> w_;
  std::string name_;
};

struct AdmissibilityReport {
  bool admissible = false;
  /// Continuous: int_{-inf}^0 e^{nu tau} / w dtau. Discrete: unused (0).
  double integral = 0.0;
  /// Discrete sums of the convergence proof; 0 for the continuous case.
  double c1 = 0.0;
  double c2 = 0.0;
  /// When not admissible: block (continuous, in units of 1/nu) or term index
  /// (discrete, |k|) where divergence was detected.
  std::optional<long> divergent_index;
  std::string detail;
};

/// Evaluates the Theorem-1 style integral in blocks of length 1/nu. The sum is
/// certified once consecutive block ratios stay below 1 and the geometric tail
/// bound falls under 1e-12 of the total; ratios >= 1 over 10 consecutive
/// blocks (or no certificate within max_blocks) give a divergence verdict.
AdmissibilityReport weighting_admissible(const WeightingFunction& w, double nu, long max_blocks = 100000);

/// Discrete analog for
///   c1 = sum_{k<=-1} |k| e^{-(|k|-1) nu Ts} / min_{k<=l<=0} w_l
///   c2 = sum_{k<=0} e^{-|k| nu Ts} / w_{k-1}
/// with the same block certificate (blocks of ceil(1/(nu Ts)) terms).
AdmissibilityReport weighting_admissible(const WeightingSequence& w, double nu, double Ts,
                                         long max_blocks = 100000);

}  // namespace dms
