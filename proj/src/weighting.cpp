#include "dms/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "dms/error.hpp"
#include "dms/quadrature.hpp"

namespace dms {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Probe grid -10^e for e in [-3, 12] in quarter decades, plus 0.
std::vector<double> probes() {
  std::vector<double> out{0.0};
  for (int e = -12; e <= 48; ++e) out.push_back(-std::pow(10.0, e / 4.0));
  return out;
}

template <class W>
void validate_values(W&& w, const std::vector<double>& at, const std::string& name) {
  for (double x : at) {
    const double y = w(x);
    // Far probes may underflow to 0; only the value at 0 must be positive.
    if (!(y >= 0.0 && y <= 1.0 + 1e-12) || (x == 0.0 && !(y > 0.0))) {
      std::ostringstream msg;
      msg << "weighting " << name << ": w(" << x << ") = " << y << " is outside (0, 1]";
      throw InvalidArgument(msg.str());
    }
  }
  if (!(w(at.back()) < 1e-3)) {
    throw InvalidArgument("weighting " + name + ": does not decay to 0 at -infinity");
  }
}

}  // namespace

WeightingFunction::WeightingFunction(Family f, double rate, double scale,
                                     std::function<double(double)> w, std::string name)
    : family_(f), rate_(rate), scale_(scale), w_(std::move(w)), name_(std::move(name)) {
  validate_values(w_, probes(), name_);
}

WeightingFunction WeightingFunction::exponential(double beta) {
  if (!(beta > 0) || !std::isfinite(beta)) throw InvalidArgument("exponential weighting: beta must be > 0");
  std::ostringstream name;
  name << "exp(" << beta << " tau)";
  return {Family::exponential, beta, 1.0, [beta](double tau) { return std::exp(beta * tau); }, name.str()};
}

WeightingFunction WeightingFunction::polynomial_exponential(double a) {
  if (!(a > 0) || !std::isfinite(a)) throw InvalidArgument("polynomial-exponential weighting: a must be > 0");
  const double s = std::max(1.0, 1.0 / (a * std::numbers::e));
  std::ostringstream name;
  name << "max(1,|tau|) exp(" << a << " tau)/" << s;
  return {Family::polynomial_exponential, a, s,
          [a, s](double tau) { return std::max(1.0, std::abs(tau)) * std::exp(a * tau) / s; }, name.str()};
}

WeightingFunction WeightingFunction::custom(std::function<double(double)> w, std::string name) {
  if (!w) throw InvalidArgument("custom weighting: empty function");
  return {Family::custom, 0.0, 1.0, std::move(w), std::move(name)};
}

double WeightingFunction::operator()(double tau) const {
  if (!(tau <= 0)) throw InvalidArgument("weighting: tau must be <= 0");
  if (tau == -kInf) return 0.0;
  return w_(tau);
}

double WeightingFunction::sup_on(double lo, double hi) const {
  if (!(lo <= hi) || !(hi <= 0)) throw InvalidArgument("weighting sup_on: requires lo <= hi <= 0");
  switch (family_) {
    case Family::exponential:
      return (*this)(hi);
    case Family::polynomial_exponential: {
      // Increasing on (-inf, -1/a] when 1/a > 1, decreasing on [-1/a, -1], then
      // e^{a tau} increasing on [-1, 0].
      double best = std::max((*this)(hi), lo == -kInf ? 0.0 : (*this)(lo));
      const double peak = -1.0 / rate_;
      if (peak < -1.0 && lo <= peak && peak <= hi) best = std::max(best, (*this)(peak));
      return best;
    }
    case Family::custom: {
      if (lo == -kInf) throw InvalidArgument("weighting sup_on: unbounded interval for a custom weighting");
      double best = 0.0;
      constexpr int n = 2000;
      for (int i = 0; i <= n; ++i) best = std::max(best, (*this)(lo + (hi - lo) * i / n));
      return best;
    }
  }
  return 0.0;
}

WeightingSequence::WeightingSequence(std::function<double(long)> w, std::string name)
    : w_(std::move(w)), name_(std::move(name)) {
  std::vector<double> at;
  for (double x : probes()) at.push_back(std::round(x));
  at.erase(std::unique(at.begin(), at.end()), at.end());
  validate_values([this](double k) { return w_(static_cast<long>(k)); }, at, name_);
}

WeightingSequence WeightingSequence::exponential(double b, double Ts) {
  if (!(b > 0) || !(Ts > 0)) throw InvalidArgument("exponential weighting: b and Ts must be > 0");
  std::ostringstream name;
  name << "exp(-" << b << " Ts |k|)";
  return {[b, Ts](long k) { return std::exp(-b * Ts * std::abs(static_cast<double>(k))); }, name.str()};
}

WeightingSequence WeightingSequence::polynomial_exponential(double a, double Ts) {
  if (!(a > 0) || !(Ts > 0)) throw InvalidArgument("polynomial-exponential weighting: a and Ts must be > 0");
  const double r = a * Ts;
  auto raw = [r](double m) { return std::max(1.0, m) * std::exp(-r * m); };
  // The continuous peak is at |k| = 1/r; the integer supremum is at a neighbour.
  double s = 1.0;
  const double peak = 1.0 / r;
  for (double m : {std::floor(peak), std::ceil(peak)}) {
    if (m >= 0) s = std::max(s, raw(m));
  }
  std::ostringstream name;
  name << "max(1,|k|) exp(-" << a << " Ts |k|)/" << s;
  return {[raw, s](long k) { return raw(std::abs(static_cast<double>(k))) / s; }, name.str()};
}

WeightingSequence WeightingSequence::custom(std::function<double(long)> w, std::string name) {
  if (!w) throw InvalidArgument("custom weighting: empty function");
  return {std::move(w), std::move(name)};
}

namespace {

// Sums block values produced by next_block() with the geometric-ratio tail
// certificate shared by both admissibility tests.
template <class NextBlock>
AdmissibilityReport certify(NextBlock&& next_block, long max_blocks, double& total) {
  AdmissibilityReport rep;
  total = 0.0;
  double prev = next_block();
  total += prev;
  int run_ge1 = 0;
  long run_start = 0;
  for (long j = 1; j < max_blocks; ++j) {
    const double cur = next_block();
    if (!std::isfinite(cur) || !std::isfinite(total + cur)) {
      rep.divergent_index = j;
      rep.detail = "block sum overflowed";
      return rep;
    }
    total += cur;
    const double ratio = prev > 0 ? cur / prev : (cur > 0 ? kInf : 0.0);
    if (ratio >= 1.0) {
      if (run_ge1++ == 0) run_start = j;
      if (run_ge1 >= 10) {
        rep.divergent_index = run_start;
        rep.detail = "block ratios >= 1";
        return rep;
      }
    } else {
      run_ge1 = 0;
      const double tail = cur * ratio / (1.0 - ratio);
      if (tail <= 1e-12 * total) {
        rep.admissible = true;
        std::ostringstream msg;
        msg << "certified after " << j + 1 << " blocks, tail bound " << tail;
        rep.detail = msg.str();
        return rep;
      }
    }
    prev = cur;
  }
  rep.divergent_index = max_blocks;
  rep.detail = "no tail certificate within the block budget";
  return rep;
}

}  // namespace

AdmissibilityReport weighting_admissible(const WeightingFunction& w, double nu, long max_blocks) {
  if (!(nu > 0)) throw InvalidArgument("weighting_admissible: nu must be > 0");
  const double block = 1.0 / nu;
  long j = 0;
  auto next_block = [&] {
    const double hi = -block * static_cast<double>(j);
    const double lo = hi - block;
    ++j;
    // Scale inside the integrand so the quadrature tolerance stays relative.
    const double scale = std::exp(nu * hi) / w(hi);
    if (!std::isfinite(scale)) return kInf;
    auto f = [&](double tau) { return std::exp(nu * tau) / w(tau) / scale; };
    return scale * integrate_interval(f, lo, hi, 1e-14, 1e-12, 4000).value;
  };
  double total = 0.0;
  AdmissibilityReport rep = certify(next_block, max_blocks, total);
  if (rep.admissible) rep.integral = total;
  return rep;
}

AdmissibilityReport weighting_admissible(const WeightingSequence& w, double nu, double Ts, long max_blocks) {
  if (!(nu > 0) || !(Ts > 0)) throw InvalidArgument("weighting_admissible: nu and Ts must be > 0");
  const long block = std::max(1L, static_cast<long>(std::ceil(1.0 / (nu * Ts))));

  // c1: terms for k = -1, -2, ...; running minimum of w over [k, 0].
  double running_min = w(0);
  long m = 1;
  auto next_c1 = [&] {
    double s = 0.0;
    for (long i = 0; i < block; ++i, ++m) {
      running_min = std::min(running_min, w(-m));
      s += static_cast<double>(m) * std::exp(-(static_cast<double>(m) - 1.0) * nu * Ts) / running_min;
    }
    return s;
  };
  double c1 = 0.0;
  AdmissibilityReport r1 = certify(next_c1, max_blocks, c1);

  long n = 0;
  auto next_c2 = [&] {
    double s = 0.0;
    for (long i = 0; i < block; ++i, ++n) {
      s += std::exp(-static_cast<double>(n) * nu * Ts) / w(-n - 1);
    }
    return s;
  };
  double c2 = 0.0;
  AdmissibilityReport r2 = certify(next_c2, max_blocks, c2);

  AdmissibilityReport rep;
  rep.admissible = r1.admissible && r2.admissible;
  if (rep.admissible) {
    rep.c1 = c1;
    rep.c2 = c2;
    rep.detail = "c1: " + r1.detail + "; c2: " + r2.detail;
  } else {
    const AdmissibilityReport& bad = r1.admissible ? r2 : r1;
    rep.divergent_index = *bad.divergent_index * block;
    rep.detail = std::string(r1.admissible ? "c2" : "c1") + " diverges: " + bad.detail;
  }
  return rep;
}

}  // namespace dms
