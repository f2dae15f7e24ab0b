#include "dms/transport.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

// pchip.hpp calls unqualified isnan; <math.h> puts it in the global namespace.
#include <math.h>
#include <boost/math/interpolators/pchip.hpp>

#include "dms/constants.hpp"
#include "dms/csv.hpp"
#include "dms/error.hpp"
#include "dms/normal_stream.hpp"
#include "dms/parallel.hpp"
#include "dms/physics.hpp"

namespace dms {

namespace {

double level_center(double E_level, double v, const SwitchParams& p) {
  return E_level + (p.eta - 0.5) * v;
}

}  // namespace

double bridge_population(double v, State state, const SwitchParams& p, const QuadratureSpec& spec) {
  p.validate();
  if (!std::isfinite(v)) throw InvalidArgument("bridge_population: bias must be finite");
  const double gl = p.tunneling_left(state);
  const double gr = p.tunneling_right(state);
  const double width = p.level_width(state);
  const double center = level_center(p.level_energy(state), v, p);
  const double T = p.T;
  auto f = [=](double E) {
    const double occupation =
        (gl * fermi(E, v, Branch::plus, T) + gr * fermi(E, v, Branch::minus, T)) / width;
    return occupation * lorentzian_dos(E, center, width);
  };
  const double steps[] = {-0.5 * v, 0.5 * v};
  const IntegralResult r = integrate_line(f, center, spec, steps, LorentzianTail{center, width});

  double b = r.value;
  if (b < 0.0 || b > 1.0) {
    const double overshoot = b < 0.0 ? -b : b - 1.0;
    if (overshoot > spec.abs_tol) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "bridge_population: value " << b << " at v = " << v << " (" << to_string(state)
          << ") leaves [0, 1] beyond abs_tol";
      throw NonConvergence(msg.str(), b, r.error_estimate);
    }
    b = std::clamp(b, 0.0, 1.0);
  }
  return b;
}

BridgePopulation bridge_populations(double v, const SwitchParams& p, const QuadratureSpec& spec) {
  return {v, bridge_population(v, State::AB, p, spec), bridge_population(v, State::ABbar, p, spec)};
}

std::uint64_t current_tag(double v, State state) {
  const auto bits = std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v);
  return splitmix64_mix(bits ^ (state == State::AB ? 0x41424ULL : 0x4142424152ULL));
}

IntegralResult state_current_result(double v, State state, const SwitchParams& p,
                                    const QuadratureSpec& spec, std::uint64_t tag) {
  p.validate();
  spec.validate();
  if (!std::isfinite(v)) throw InvalidArgument("state_current: bias must be finite");
  IntegralResult out;
  if (v == 0.0) return out;  // f- == f+ pointwise

  const double width = p.level_width(state);
  const double T = p.T;
  const double steps[] = {-0.5 * v, 0.5 * v};
  std::size_t inner_evaluations = 0;
  auto transmission = [&](double E_level) {
    const double center = level_center(E_level, v, p);
    auto f = [=](double E) {
      const double window = fermi(E, v, Branch::minus, T) - fermi(E, v, Branch::plus, T);
      return window * lorentzian_dos(E, center, width);
    };
    const IntegralResult r =
        integrate_line(f, center, spec, steps, LorentzianTail{center, width});
    inner_evaluations += r.evaluations;
    return r.value;
  };
  const IntegralResult e =
      gauss_expectation(transmission, p.level_energy(state), p.level_broadening(state), spec, tag);

  const double scale = p.N * constants::elementary_charge / (2.0 * constants::pi * constants::hbar) *
                       p.current_coupling(state);
  out.value = scale * e.value;
  out.error_estimate = std::abs(scale) * e.error_estimate;
  out.standard_error = std::abs(scale) * e.standard_error;
  out.evaluations = inner_evaluations;
  return out;
}

IntegralResult state_current_result(double v, State state, const SwitchParams& p,
                                    const QuadratureSpec& spec) {
  return state_current_result(v, state, p, spec, current_tag(v, state));
}

double state_current(double v, State state, const SwitchParams& p, const QuadratureSpec& spec) {
  return state_current_result(v, state, p, spec).value;
}

double average_current(double I_AB, double I_ABbar, double P_AB) {
  if (!(P_AB >= 0.0 && P_AB <= 1.0)) throw InvalidArgument("average_current: P_AB must lie in [0, 1]");
  return I_AB * P_AB + I_ABbar * (1.0 - P_AB);
}

double average_current(double v, double P_AB, const SwitchParams& p, const QuadratureSpec& spec) {
  if (!(P_AB >= 0.0 && P_AB <= 1.0)) throw InvalidArgument("average_current: P_AB must lie in [0, 1]");
  return average_current(state_current(v, State::AB, p, spec),
                         state_current(v, State::ABbar, p, spec), P_AB);
}

CurrentTable CurrentTable::build(const Eigen::VectorXd& v_grid, const SwitchParams& p,
                                 const QuadratureSpec& spec, int threads) {
  const auto n = static_cast<std::size_t>(v_grid.size());
  Eigen::VectorXd I_AB(v_grid.size()), I_ABbar(v_grid.size());
  parallel_for(2 * n, threads, [&](std::size_t job) {
    const auto i = static_cast<Eigen::Index>(job / 2);
    if (job % 2 == 0) I_AB(i) = state_current(v_grid(i), State::AB, p, spec);
    else I_ABbar(i) = state_current(v_grid(i), State::ABbar, p, spec);
  });
  return CurrentTable(v_grid, std::move(I_AB), std::move(I_ABbar), spec);
}

CurrentTable::CurrentTable(Eigen::VectorXd v_grid, Eigen::VectorXd I_AB, Eigen::VectorXd I_ABbar,
                           QuadratureSpec build_spec)
    : v_grid_(std::move(v_grid)),
      I_AB_(std::move(I_AB)),
      I_ABbar_(std::move(I_ABbar)),
      spec_(build_spec) {
  if (v_grid_.size() < 4) throw InvalidArgument("CurrentTable: at least 4 grid nodes are required");
  if (I_AB_.size() != v_grid_.size() || I_ABbar_.size() != v_grid_.size()) {
    throw InvalidArgument("CurrentTable: column lengths differ");
  }
  for (Eigen::Index i = 0; i < v_grid_.size(); ++i) {
    if (!std::isfinite(v_grid_(i)) || !std::isfinite(I_AB_(i)) || !std::isfinite(I_ABbar_(i))) {
      throw InvalidArgument("CurrentTable: non-finite entry");
    }
    if (i > 0 && !(v_grid_(i) > v_grid_(i - 1))) {
      throw InvalidArgument("CurrentTable: grid must be strictly ascending");
    }
  }
  auto make = [&](const Eigen::VectorXd& y) {
    return std::make_shared<Pchip>(std::vector<double>(v_grid_.data(), v_grid_.data() + v_grid_.size()),
                                   std::vector<double>(y.data(), y.data() + y.size()));
  };
  spline_AB_ = make(I_AB_);
  spline_ABbar_ = make(I_ABbar_);
}

std::pair<double, double> CurrentTable::lookup(double v) const {
  const double lo = v_grid_(0);
  const double hi = v_grid_(v_grid_.size() - 1);
  if (!(v >= lo && v <= hi)) {
    std::ostringstream msg;
    msg << "CurrentTable::lookup: v = " << v << " outside [" << lo << ", " << hi << "]";
    throw InvalidArgument(msg.str());
  }
  const double* begin = v_grid_.data();
  const double* end = begin + v_grid_.size();
  const double* it = std::lower_bound(begin, end, v);
  if (it != end && *it == v) {
    const auto i = it - begin;
    return {I_AB_(i), I_ABbar_(i)};
  }
  return {(*spline_AB_)(v), (*spline_ABbar_)(v)};
}

void CurrentTable::write_csv(std::ostream& out) const {
  CsvTable t;
  const nlohmann::json spec = quadrature_to_json(spec_);
  for (const auto& [key, value] : spec.items()) {
    t.comments.push_back(key + "=" + value.dump());
  }
  t.header = {"v", "I_AB", "I_ABbar"};
  t.columns = {std::vector<double>(v_grid_.data(), v_grid_.data() + v_grid_.size()),
               std::vector<double>(I_AB_.data(), I_AB_.data() + I_AB_.size()),
               std::vector<double>(I_ABbar_.data(), I_ABbar_.data() + I_ABbar_.size())};
  dms::write_csv(out, t);
}

CurrentTable CurrentTable::read_csv(std::istream& in) {
  const CsvTable t = dms::read_csv(in);
  nlohmann::json spec = nlohmann::json::object();
  for (const auto& line : t.comments) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument("CurrentTable: malformed header line \"" + line + "\"");
    try {
      spec[line.substr(0, eq)] = nlohmann::json::parse(line.substr(eq + 1));
    } catch (const nlohmann::json::exception&) {
      throw InvalidArgument("CurrentTable: malformed header value in \"" + line + "\"");
    }
  }
  auto vec = [&](const char* name) {
    const auto& c = t.column(name);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())));
  };
  return CurrentTable(vec("v"), vec("I_AB"), vec("I_ABbar"), quadrature_from_json(spec));
}

}  // namespace dms
