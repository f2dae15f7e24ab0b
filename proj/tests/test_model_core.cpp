#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "dms/error.hpp"
#include "dms/physics.hpp"
#include "dms/quadrature.hpp"
#include "dms/rates.hpp"
#include "dms/transport.hpp"

using namespace dms;

// Reference values: tests/oracles/model_oracle.py (closed-form digamma integrals).
namespace ref {
constexpr double fermi_01 = 1.9992765451688519e-02;
constexpr double marcus_peak = 8.1537960862483527e-01;
constexpr double k01_1 = 4.8874301083891659e-02;
constexpr double k10_1 = 5.1628233739557228e-01;
constexpr double nu_22 = 3.0431892885015049e-01;  // 20001-point grid
constexpr double argmin_22 = -5.1580000000000004e-01;
constexpr double nu_11 = 3.0431892870612515e-01;
constexpr double nu_0515 = 3.2080083241806279e-01;
constexpr double g1 = 8.7657213105329912e-01;
constexpr double g2 = 8.6465918151534804e-01;
}  // namespace ref

TEST_CASE("fermi occupation") {
  CHECK(fermi(0.0, 0.0, Branch::plus, 298.15) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(fermi(50.0, 0.0, Branch::plus, 298.15) < 1e-300);
  CHECK(fermi(-50.0, 0.0, Branch::plus, 298.15) == 1.0);
  CHECK(std::abs(fermi(0.1, 0.0, Branch::plus, 298.15) - ref::fermi_01) < 1e-12);
  CHECK(std::abs(fermi(0.1, 0.0, Branch::plus, 298.15) - 0.02000) < 1e-5);
  // f+ shifts the argument by +v/2.
  CHECK(fermi(0.3, 0.4, Branch::plus, 298.15) == doctest::Approx(fermi(0.5, 0.0, Branch::plus, 298.15)));
  CHECK(fermi(0.3, 0.4, Branch::minus, 298.15) == doctest::Approx(fermi(0.1, 0.0, Branch::plus, 298.15)));
  CHECK_THROWS_AS(fermi(std::numeric_limits<double>::quiet_NaN(), 0.0, Branch::plus, 298.15), InvalidArgument);
  CHECK_THROWS_AS(fermi(0.0, std::numeric_limits<double>::infinity(), Branch::plus, 298.15), InvalidArgument);
  CHECK_THROWS_AS(fermi(0.0, 0.0, Branch::plus, 0.0), InvalidArgument);
}

TEST_CASE("fermi difference has the sign of the bias") {
  for (double v : {-2.0, -0.3, 0.0, 0.4, 2.5}) {
    for (double e = -3.0; e <= 3.0; e += 0.01) {
      const double d = fermi(e, v, Branch::minus, 298.15) - fermi(e, v, Branch::plus, 298.15);
      if (v >= 0) CHECK(d >= 0.0);
      if (v <= 0) CHECK(d <= 0.0);
    }
  }
}

TEST_CASE("lorentzian density") {
  const double w = 0.2, c = 0.7;
  CHECK(lorentzian_dos(c, c, w) == doctest::Approx(2.0 / (constants::pi * w)));
  CHECK(lorentzian_dos(c + w / 2, c, w) == doctest::Approx(1.0 / (constants::pi * w)));
  CHECK_THROWS_AS(lorentzian_dos(0.0, 0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(lorentzian_dos(0.0, 0.0, -1.0), InvalidArgument);
}

TEST_CASE("lorentzian normalisation with tail correction across widths") {
  QuadratureSpec q;
  for (double w : {1e-3, 1e-2, 0.1, 0.5, 1.0}) {
    auto f = [&](double e) { return lorentzian_dos(e, 0.0, w); };
    const IntegralResult r = integrate_line(f, 0.0, q, {}, LorentzianTail{0.0, w});
    CHECK(std::abs(r.value - 1.0) < 1e-6);
  }
}

TEST_CASE("marcus rate") {
  SwitchParams p;
  // alpha_1 + lambda = 0 at v = E_PT - lambda.
  const double v0 = p.E_PT - p.lambda;
  CHECK(v0 == doctest::Approx(-1.513));
  CHECK(std::abs(marcus_rate(v0, Branch::plus, Occupancy::empty, p) - ref::marcus_peak) < 1e-12);
  CHECK(std::abs(marcus_rate(v0, Branch::plus, Occupancy::empty, p) - 0.8155) < 1e-3);
  for (double v = -5.0; v <= 5.0; v += 0.25) {
    for (auto b : {Branch::plus, Branch::minus}) {
      for (auto s : {Occupancy::empty, Occupancy::occupied}) CHECK(marcus_rate(v, b, s, p) > 0.0);
    }
  }
  // The denominator flag only rescales the exponent.
  SwitchParams c = p;
  c.marcus_denominator = MarcusDenominator::conventional_lambda;
  const double kT = p.thermal_energy();
  const double off = 0.3 - p.E_PT + p.lambda;
  const double pre = p.gamma / 2 * std::sqrt(constants::pi * kT / p.lambda);
  CHECK(marcus_rate(0.3, Branch::plus, Occupancy::empty, c) ==
        doctest::Approx(pre * std::exp(-off * off / (4 * kT * p.lambda))));
  CHECK(marcus_rate(0.3, Branch::plus, Occupancy::empty, p) ==
        doctest::Approx(pre * std::exp(-off * off / (4 * kT * p.gamma))));
}

TEST_CASE("params validation and JSON round trip") {
  SwitchParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(p.level_width(State::AB) == doctest::Approx(0.10425));
  CHECK(p.level_width(State::ABbar) == doctest::Approx(5.44 * 0.10425));
  CHECK(p.level_energy(State::ABbar) == doctest::Approx(2.76));
  CHECK(p.current_coupling(State::ABbar) == doctest::Approx(5.44e-5));

  const nlohmann::json j = params_to_json(p);
  CHECK(j.at("gamma_L").get<double>() == doctest::Approx(4.0));
  CHECK(j.at("gamma_R").get<double>() == doctest::Approx(100.25));
  CHECK(j.at("Gamma_AB").get<double>() == doctest::Approx(0.01));
  CHECK(params_from_json(j) == p);

  CHECK_THROWS_WITH_AS(params_from_json({{"kapa", 1.0}}), doctest::Contains("kapa"), InvalidArgument);
  CHECK_THROWS_WITH_AS(params_from_json({{"eta", 1.5}}), doctest::Contains("eta"), InvalidArgument);
  CHECK_THROWS_WITH_AS(params_from_json({{"N", 1.5}}), doctest::Contains("N"), InvalidArgument);
  CHECK_THROWS_AS(params_from_json({{"marcus_denominator", "lambda"}}), InvalidArgument);
  CHECK(params_from_json({{"marcus_denominator", "conventional-lambda"}}).marcus_denominator ==
        MarcusDenominator::conventional_lambda);
  SwitchParams bad = p;
  bad.gammaL_AB = bad.gammaR_AB = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("rate set at 1 V against the oracle") {
  SwitchParams p;
  QuadratureSpec q;
  const RateSet r = rate_set(1.0, p, q);
  CHECK(std::abs(r.k01 - ref::k01_1) < 1e-10 * ref::k01_1 + 1e-14);
  CHECK(std::abs(r.k10 - ref::k10_1) < 1e-10 * ref::k10_1);
  CHECK(r.A == -(r.k01 + r.k10));
  CHECK(r.K == -r.A);
  // Bit-identical on repetition.
  const RateSet again = rate_set(1.0, p, q);
  CHECK(again.k01 == r.k01);
  CHECK(again.k10 == r.k10);
}

TEST_CASE("rates_from_bridge endpoint reduces to the bare Marcus rate") {
  SwitchParams p;
  const RateSet r = rates_from_bridge(0.4, 0.0, 0.0, p);
  CHECK(r.k01 == marcus_rate(0.4, Branch::plus, Occupancy::empty, p));
  CHECK(r.k10 == marcus_rate(0.4, Branch::minus, Occupancy::empty, p));
}

TEST_CASE("randomised sign invariants over [-5, 5]") {
  SwitchParams p;
  QuadratureSpec q;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> v(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = v(rng);
    const RateSet r = rate_set(x, p, q);
    REQUIRE(r.k01 >= 0.0);
    REQUIRE(r.k10 >= 0.0);
    REQUIRE(r.K > 0.0);
    REQUIRE(r.A < 0.0);
    const double f = fermi(x, x, Branch::plus, p.T);
    REQUIRE(f >= 0.0);
    REQUIRE(f <= 1.0);
  }
}

TEST_CASE("contraction rate") {
  SwitchParams p;
  QuadratureSpec q;
  const ContractionRate c = contraction_rate_nu(DomainBounds(-2, 2), p, q);
  CHECK(c.nu == doctest::Approx(ref::nu_22).epsilon(1e-8));
  CHECK(c.nu <= ref::nu_22 + 1e-12);  // refinement can only go below the grid minimum
  CHECK(c.argmin == doctest::Approx(ref::argmin_22).epsilon(1e-3));
  const double n11 = contraction_rate_nu(DomainBounds(-1, 1), p, q).nu;
  CHECK(n11 == doctest::Approx(ref::nu_11).epsilon(1e-8));
  CHECK(n11 >= c.nu);
  CHECK(contraction_rate_nu(DomainBounds(0.5, 1.5), p, q).nu == doctest::Approx(ref::nu_0515).epsilon(1e-8));
  // Degenerate interval: K at the point.
  CHECK(contraction_rate_nu(DomainBounds(1.0, 1.0), p, q).nu == doctest::Approx(ref::k01_1 + ref::k10_1));
  // Guard.
  RateFunction tiny = [](double v) { return RateSet{v, 1e-14, 1e-14, -2e-14, 2e-14}; };
  CHECK_THROWS_AS(contraction_rate_nu(DomainBounds(-1, 1), tiny), DegenerateContraction);
}

TEST_CASE("sensitivity bounds") {
  SwitchParams p;
  QuadratureSpec q;
  const SensitivityBounds g = sensitivity_bounds(DomainBounds(-2, 2), p, q);
  CHECK(g.g1 == doctest::Approx(ref::g1).epsilon(1e-5));
  CHECK(g.g2 == doctest::Approx(ref::g2).epsilon(1e-5));
  CHECK(g.g2 <= g.g1 + g.max_dk10 + 1e-12);

  RateFunction flat = [](double v) { return RateSet{v, 0.2, 0.3, -0.5, 0.5}; };
  const SensitivityBounds z = sensitivity_bounds(DomainBounds(-1, 1), flat);
  CHECK(z.g1 == 0.0);
  CHECK(z.g2 == 0.0);
}

TEST_CASE("tabulated rates match direct evaluation") {
  SwitchParams p;
  QuadratureSpec q;
  const RateFunction tab = tabulated_rates(p, q, DomainBounds(-2, 2));
  const RateFunction direct = direct_rates(p, q);
  for (double v = -2.0; v <= 2.0; v += 0.0731) {
    const RateSet a = tab(v), b = direct(v);
    CHECK(std::abs(a.k01 - b.k01) < 1e-9 * (1 + b.k01));
    CHECK(std::abs(a.k10 - b.k10) < 1e-9 * (1 + b.k10));
  }
}
