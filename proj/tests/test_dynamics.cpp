#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "dms/dynamics.hpp"
#include "dms/error.hpp"
#include "dms/verify.hpp"
#include "dms/weighting.hpp"

using namespace dms;

// tests/oracles/model_oracle.py
namespace ref {
constexpr double k01_1 = 4.8874301083891659e-02;
constexpr double K_1 = 5.6515663847946396e-01;
constexpr double dt_step_03_07_05 = 2.1841996916095305e-01;
constexpr double dt_gain_1_01 = 4.7518873399049356e-03;
constexpr double step_v1_P3 = 1.6236564175819140e-01;
constexpr double sine_f01_P25 = 6.9394554571935635e-02;
constexpr double nu_grid = 3.0431892885015049e-01;  // nu used for the three values below
constexpr double weight_integral = 5.7537183616311385e+00;
constexpr double c1 = 2.6244165333748344e+02;
constexpr double c2 = 1.4714990335852168e+01;
}  // namespace ref

namespace {

const RateFunction& rates() {
  static const RateFunction r = direct_rates(SwitchParams{}, QuadratureSpec{});
  return r;
}

const RateFunction& table() {
  static const RateFunction r = tabulated_rates(SwitchParams{}, QuadratureSpec{}, DomainBounds(-2, 2));
  return r;
}

double nu22() {
  static const double nu = contraction_rate_nu(DomainBounds(-2, 2), table()).nu;
  return nu;
}

}  // namespace

TEST_CASE("signals") {
  const BiasSignal c = BiasSignal::constant(1.0);
  CHECK(c(123.0) == 1.0);
  CHECK(c.range() == DomainBounds(1, 1));
  CHECK(c.domain().contains(c.range()));

  const BiasSignal s = BiasSignal::sinusoid(1.0, 0.5, 0.1);
  CHECK(s.range() == DomainBounds(0.5, 1.5));
  CHECK(s(0.0) == doctest::Approx(1.5));
  CHECK(*s.period() == doctest::Approx(10.0));
  const BiasSignal a = BiasSignal::affine(0.5, -1.0, s);
  CHECK(a.range().a == doctest::Approx(-1.0));
  CHECK(a.range().b == doctest::Approx(0.0));
  CHECK(a(0.0) == doctest::Approx(-1.0));
  CHECK(*a.period() == doctest::Approx(10.0));

  const BiasSignal z = BiasSignal::zoh({0.1, 0.2, 0.3}, 0.5, 1.0);
  CHECK(z(1.0) == 0.1);
  CHECK(z(1.49) == 0.1);
  CHECK(z(1.5) == 0.2);
  CHECK(z(0.0) == 0.1);
  CHECK(z(9.0) == 0.3);
  CHECK(z.is_piecewise_constant());
  CHECK(z.next_change_after(1.2) == doctest::Approx(1.5));
  CHECK(*z.sample_period() == 0.5);
  CHECK(std::isinf(z.next_change_after(2.0)));

  CHECK_NOTHROW(s.with_domain(DomainBounds(-2, 2)));
  CHECK_THROWS_AS(s.with_domain(DomainBounds(0.6, 2)), InvalidArgument);
  CHECK_THROWS_AS(BiasSignal::piecewise({0.0, 0.0}, {1.0, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(BiasSignal::zoh({1.0}, 0.0), InvalidArgument);
}

TEST_CASE("signals from JSON") {
  CHECK(signal_from_json({{"kind", "constant"}, {"value", 1.0}})(3.0) == 1.0);
  const BiasSignal a = signal_from_json(
      {{"kind", "affine"}, {"a", 0.5}, {"k", -1.0},
       {"inner", {{"kind", "sinusoid"}, {"offset", 1.0}, {"amplitude", 0.5}, {"frequency", 0.1}}}});
  CHECK(a.range().a == doctest::Approx(-1.0));
  CHECK(signal_from_json({{"kind", "constant"}, {"value", 1.0}, {"domain", {-2, 2}}}).domain() ==
        DomainBounds(-2, 2));
  CHECK_THROWS_WITH_AS(signal_from_json({{"kind", "constant"}, {"valu", 1.0}}), doctest::Contains("valu"),
                       InvalidArgument);
  CHECK_THROWS_AS(signal_from_json({{"kind", "constant"}, {"value", 3.0}, {"domain", {-2, 2}}}), InvalidArgument);
  CHECK_THROWS_AS(signal_from_json({{"kind", "square"}}), InvalidArgument);

  const auto dir = std::filesystem::temp_directory_path() / "dms_signal_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "samples.csv");
    f << "# Ts=0.25\nV\n0.5\n1\n1.5\n";
  }
  const BiasSignal z = signal_from_json({{"kind", "zoh"}, {"file", "samples.csv"}, {"domain", {0, 2}}}, dir);
  CHECK(*z.sample_period() == 0.25);
  CHECK(z(0.3) == 1.0);
  CHECK_THROWS_AS(signal_from_json({{"kind", "zoh"}, {"file", "samples.csv"}, {"domain", {0, 1}}}, dir),
                  InvalidArgument);
  std::filesystem::remove_all(dir);
}

TEST_CASE("transition function") {
  const BiasSignal c = BiasSignal::constant(1.0);
  CHECK(transition(2.0, 2.0, c, rates()) == 1.0);
  CHECK(transition(3.0, 1.0, c, rates()) == doctest::Approx(std::exp(-ref::K_1 * 2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(transition(1.0, 2.0, c, rates()), InvalidArgument);
  // Piecewise: exact sum of segment exponents.
  const BiasSignal z = BiasSignal::zoh({-1.0, 1.0, 0.2}, 1.0);
  const double expected = rates()(-1.0).A * 0.5 + rates()(1.0).A + rates()(0.2).A * 0.25;
  CHECK(transition_exponent(2.25, 0.5, z, rates()) == doctest::Approx(expected).epsilon(1e-14));
  // Smooth signal: within (0, 1] and below the contraction bound.
  const BiasSignal s = BiasSignal::sinusoid(0.0, 2.0, 0.05);
  const double phi = transition(30.0, 0.0, s, rates());
  CHECK(phi > 0.0);
  CHECK(phi <= std::exp(-nu22() * 30.0) * (1 + 1e-9));
}

TEST_CASE("steady state and gain") {
  CHECK(steady_state(1.0, rates()) == doctest::Approx(ref::k01_1 / ref::K_1).epsilon(1e-10));
  RateFunction sym = [](double v) { return RateSet{v, 0.3, 0.3, -0.6, 0.6}; };
  CHECK(steady_state(0.0, sym) == 0.5);
  RateFunction dead = [](double v) { return RateSet{v, 0.0, 0.0, 0.0, 0.0}; };
  CHECK_THROWS_AS(steady_state(0.0, dead), DegenerateContraction);
  CHECK_THROWS_AS(dt_gain(0.0, 0.1, dead), DegenerateContraction);

  CHECK(std::abs(dt_gain(1.0, 0.1, rates()) - ref::dt_gain_1_01) < 1e-13);
  for (double Ts : {1e-3, 1e-4, 1e-6}) {
    CHECK(std::abs(dt_gain(1.0, Ts, rates()) - ref::k01_1 * Ts) <= ref::K_1 * ref::k01_1 * Ts * Ts);
  }
  CHECK(dt_gain(1.0, 1e4, rates()) == doctest::Approx(steady_state(1.0, rates())).epsilon(1e-12));
  for (double v : {-2.0, 0.0, 2.0}) {
    const double G = dt_gain(v, 0.5, rates());
    CHECK(G >= 0.0);
    CHECK(G < 1.0);
  }
}

TEST_CASE("dt_step") {
  CHECK(std::abs(dt_step(0.3, 0.7, 0.5, rates()) - ref::dt_step_03_07_05) < 1e-13);
  const double Ps = steady_state(0.7, rates());
  CHECK(dt_step(Ps, 0.7, 0.5, rates()) == doctest::Approx(Ps).epsilon(1e-14));
  CHECK_THROWS_AS(dt_step(1.1, 0.7, 0.5, rates()), InvalidArgument);
  CHECK_THROWS_AS(dt_step(-0.1, 0.7, 0.5, rates()), InvalidArgument);
  // Equals the continuous solution after one period.
  const Trajectory tr = propagate({0.0, 0.3}, BiasSignal::constant(0.7), std::vector<double>{0.5}, rates());
  CHECK(tr.P_AB(0) == doctest::Approx(dt_step(0.3, 0.7, 0.5, rates())).epsilon(1e-14));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> P(0, 1), v(-2, 2), Ts(0.01, 5);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double p0 = P(rng), x = v(rng), h = Ts(rng);
    const Trajectory rk = rk_oracle({0.0, p0}, BiasSignal::constant(x), std::vector<double>{h}, rates(), 1e-12);
    worst = std::max(worst, std::abs(rk.P_AB(0) - dt_step(p0, x, h, rates())));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("propagate under constant bias") {
  const double Ps = steady_state(1.0, rates());
  const Trajectory fixed = propagate({0.0, Ps}, BiasSignal::constant(1.0), 20.0, 0.1, rates());
  CHECK((fixed.P_AB.array() - Ps).abs().maxCoeff() < 1e-12);

  const Trajectory tr = propagate({0.0, 0.5}, BiasSignal::constant(1.0), std::vector<double>{3.0}, rates());
  CHECK(std::abs(tr.P_AB(0) - ref::step_v1_P3) < 1e-12);

  for (double p0 : {0.0, 1.0}) {
    const Trajectory t = propagate({0.0, p0}, BiasSignal::constant(1.0), 10.0, 0.5, rates());
    for (Eigen::Index k = 0; k < t.size(); ++k) {
      const double exact = Ps + (p0 - Ps) * std::exp(-ref::K_1 * t.times(k));
      CHECK(std::abs(t.P_AB(k) - exact) < 1e-13);
      if (k > 0) CHECK(std::abs(t.P_AB(k) - Ps) <= std::abs(t.P_AB(k - 1) - Ps));
    }
  }
  CHECK(fixed.size() == 201);
  const Trajectory dflt = propagate({0.0, 0.5}, BiasSignal::constant(1.0), 10.0, 0.0, rates());
  CHECK(dflt.size() == 1001);
  CHECK(dflt.times(1000) == 10.0);
}

TEST_CASE("propagate a sinusoid against the RK oracle") {
  const BiasSignal s = BiasSignal::sinusoid(1.0, 0.5, 0.1);
  const Trajectory tr = propagate({0.0, 0.0}, s, std::vector<double>{25.0}, rates());
  CHECK(std::abs(tr.P_AB(0) - ref::sine_f01_P25) < 1e-8);

  const BiasSignal s2 = BiasSignal::sinusoid(1.0, 0.5, 0.05);
  const Trajectory ex = propagate({0.0, 0.0}, s2, 60.0, 0.25, rates());
  std::vector<double> times(ex.times.data(), ex.times.data() + ex.size());
  const Trajectory rk = rk_oracle({0.0, 0.0}, s2, times, rates(), 1e-10);
  CHECK((ex.P_AB - rk.P_AB).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(ex.V(0) == doctest::Approx(1.5));
}

TEST_CASE("exact linear contraction and DT/CT consistency") {
  UniformStream u(3);
  const RandomSignal r = random_signal(u, DomainBounds(-2, 2), nu22());
  const Trajectory a = propagate({r.t_start(), 0.1}, r.signal, r.t_end(), 0.0, table());
  const Trajectory b = propagate({r.t_start(), 0.9}, r.signal, r.t_end(), 0.0, table());
  for (Eigen::Index k = 0; k < a.size(); k += 50) {
    const double phi = transition(a.times(k), r.t_start(), r.signal, table());
    CHECK(std::abs(std::abs(a.P_AB(k) - b.P_AB(k)) - 0.8 * phi) < 1e-14);
  }

  const std::vector<double> samples{0.5, 1.5, 1.0, 0.7, 1.2, 0.9, 1.4, 0.6};
  const double Ts = 0.5;
  const BiasSignal z = BiasSignal::zoh(samples, Ts);
  double P = 0.2;
  std::vector<double> ticks;
  for (std::size_t k = 1; k <= samples.size(); ++k) ticks.push_back(k * Ts);
  const Trajectory tr = propagate({0.0, 0.2}, z, ticks, table());
  const Trajectory rk = rk_oracle({0.0, 0.2}, z, ticks, table(), 1e-12);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    P = dt_step(P, samples[k], Ts, table());
    CHECK(tr.P_AB(static_cast<Eigen::Index>(k)) == doctest::Approx(P).epsilon(1e-14));
    CHECK(std::abs(rk.P_AB(static_cast<Eigen::Index>(k)) - P) < 1e-9);
  }
}

TEST_CASE("affine input invariance") {
  const BiasSignal s = BiasSignal::sinusoid(0.5, 1.0, 0.05);
  const Trajectory a = propagate({0.0, 0.3}, s, 30.0, 0.5, table());
  const Trajectory b = propagate({0.0, 0.3}, BiasSignal::affine(0.0, 1.0, s), 30.0, 0.5, table());
  CHECK(a.P_AB == b.P_AB);
  const Trajectory c = propagate({0.0, 0.3}, BiasSignal::affine(0.8, 0.0, s), 30.0, 0.5, table());
  const Trajectory d = propagate({0.0, 0.3}, BiasSignal::constant(0.8), 30.0, 0.5, table());
  CHECK((c.P_AB - d.P_AB).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("trajectory CSV") {
  const Trajectory t = propagate({0.0, 0.3}, BiasSignal::constant(0.8), 1.0, 0.5, table());
  const CsvTable c = t.to_csv();
  CHECK(c.header == std::vector<std::string>{"t", "P_AB", "P_ABbar", "V"});
  CHECK(c.rows() == 3);
  CHECK(c.column("P_ABbar")[1] == 1.0 - c.column("P_AB")[1]);
}

TEST_CASE("discrete fading functional") {
  const double nu = nu22(), Ts = 0.5, tol = 1e-10;
  const long L = truncation_depth(nu, Ts, tol);
  CHECK(std::exp(-nu * Ts * L) < tol);
  CHECK(std::exp(-nu * Ts * (L - 1)) >= tol);

  const std::vector<double> constant(static_cast<std::size_t>(L), 0.8);
  CHECK(std::abs(dt_fading_functional(constant, Ts, table(), nu, tol) - steady_state(0.8, table())) < tol);
  CHECK(dt_fading_functional({0.8}, Ts, table(), nu, tol, Padding::constant(0.8)) ==
        doctest::Approx(steady_state(0.8, table())).epsilon(1e-13));
  CHECK_THROWS_WITH_AS(dt_fading_functional({0.8, 0.9}, Ts, table(), nu, tol), doctest::Contains("padding"),
                       InvalidArgument);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> v(0.5, 1.5);
  std::vector<double> h(static_cast<std::size_t>(L) + 40);
  for (auto& x : h) x = v(rng);
  const double F = dt_fading_functional(h, Ts, table(), nu, tol);
  std::vector<double> perturbed = h;
  for (std::size_t i = 0; i < 40; ++i) perturbed[i] = -1.5;  // older than depth L
  CHECK(std::abs(dt_fading_functional(perturbed, Ts, table(), nu, tol) - F) < tol);

  // Long propagation of the same ZOH signal from P = 0.
  const BiasSignal z = BiasSignal::zoh(h, Ts);
  const Trajectory tr = propagate({0.0, 0.0}, z, std::vector<double>{Ts * h.size()}, table());
  CHECK(std::abs(tr.P_AB(0) - F) < tol);
}

TEST_CASE("discrete filter") {
  const double nu = nu22(), Ts = 0.5, tol = 1e-10;
  const long L = truncation_depth(nu, Ts, tol);
  const FilterOutput c = dt_filter(BiasSignal::constant(0.8), 0, 5, Ts, table(), nu, tol);
  for (double y : c.Y) CHECK(std::abs(y - steady_state(0.8, table())) < tol);

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> v(-2, 2);
  std::vector<double> s(static_cast<std::size_t>(L) + 30);
  for (auto& x : s) x = v(rng);
  const FilterOutput a = dt_filter(s, 0, L, L + 20, Ts, table(), nu, tol);
  // Shift the input by m samples: the output shifts by m samples exactly.
  const long m = 7;
  const FilterOutput b = dt_filter(s, m, L + m, L + m + 20, Ts, table(), nu, tol);
  CHECK(a.Y == b.Y);
  CHECK(a.k.front() == L);
  CHECK(b.k.front() == L + m);
  // Causality: changing samples at index >= k leaves Y_k unchanged.
  std::vector<double> future = s;
  for (std::size_t j = static_cast<std::size_t>(L) + 5; j < future.size(); ++j) future[j] = 0.0;
  const FilterOutput f = dt_filter(future, 0, L, L + 5, Ts, table(), nu, tol);
  for (std::size_t i = 0; i < f.Y.size(); ++i) CHECK(f.Y[i] == a.Y[i]);

  // Two paddings forget each other after the contraction depth.
  const FilterOutput pa = dt_filter(s, 0, 0, L, Ts, table(), nu, tol, Padding::constant(-2.0));
  const FilterOutput pb = dt_filter(s, 0, 0, L, Ts, table(), nu, tol, Padding::constant(2.0));
  CHECK(std::abs(pa.Y.back() - pb.Y.back()) < tol);
  CHECK(std::abs(pa.Y.front() - pb.Y.front()) > 1e-3);
  CHECK_THROWS_AS(dt_filter(s, 0, 0, 3, Ts, table(), nu, tol), InvalidArgument);
  CHECK(a.to_csv().header == std::vector<std::string>{"k", "t", "V_k", "Y_k"});
}

TEST_CASE("continuous fading functional") {
  const double nu = nu22(), tol = 1e-10;
  CHECK(std::abs(ct_fading_functional(BiasSignal::constant(0.8), 0.0, table(), nu, tol) -
                 steady_state(0.8, table())) < 1e-9);
  // Piecewise constant on the Ts lattice: matches the discrete functional.
  const double Ts = 0.5;
  const long L = truncation_depth(nu, Ts, tol) + 5;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> v(-2, 2);
  std::vector<double> h(static_cast<std::size_t>(L));
  for (auto& x : h) x = v(rng);
  const BiasSignal z = BiasSignal::zoh(h, Ts, -Ts * L);
  CHECK(std::abs(ct_fading_functional(z, 0.0, table(), nu, tol) - dt_fading_functional(h, Ts, table(), nu, tol)) <
        1e-9);
  // Sinusoidal past vs the RK oracle from the same truncation horizon.
  const BiasSignal s = BiasSignal::sinusoid(1.0, 0.5, 0.1);
  const double Th = truncation_horizon(nu, tol);
  const Trajectory rk = rk_oracle({-Th, 0.0}, s, std::vector<double>{0.0}, table(), 1e-10);
  CHECK(std::abs(ct_fading_functional(s, 0.0, table(), nu, tol) - rk.P_AB(0)) < 1e-6);
  const auto Y = ct_filter(s, {0.0, 1.0, 2.0}, table(), nu, tol);
  CHECK(Y.size() == 3);
  CHECK(std::abs(Y[0] - rk.P_AB(0)) < 1e-6);
}

TEST_CASE("weighting admissibility") {
  const double nu = ref::nu_grid;
  const AdmissibilityReport r = weighting_admissible(WeightingFunction::polynomial_exponential(nu / 2), nu);
  CHECK(r.admissible);
  CHECK(r.integral == doctest::Approx(ref::weight_integral).epsilon(1e-8));
  const AdmissibilityReport bad = weighting_admissible(WeightingFunction::exponential(2 * nu), nu);
  CHECK_FALSE(bad.admissible);
  CHECK(bad.divergent_index.has_value());
  CHECK_THROWS_AS(WeightingFunction::custom([](double) { return 1.0; }, "one"), InvalidArgument);
  CHECK_THROWS_AS(WeightingFunction::custom([](double t) { return 2 * std::exp(t); }, "big"), InvalidArgument);

  const double Ts = 0.5;
  const AdmissibilityReport d = weighting_admissible(WeightingSequence::polynomial_exponential(nu / 2, Ts), nu, Ts);
  CHECK(d.admissible);
  CHECK(d.c1 == doctest::Approx(ref::c1).epsilon(1e-8));
  CHECK(d.c2 == doctest::Approx(ref::c2).epsilon(1e-8));
  const AdmissibilityReport dbad = weighting_admissible(WeightingSequence::exponential(2 * nu, Ts), nu, Ts);
  CHECK_FALSE(dbad.admissible);
  CHECK(dbad.divergent_index.has_value());
}
