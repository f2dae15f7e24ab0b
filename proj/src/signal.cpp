#include "dms/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dms/csv.hpp"
#include "dms/error.hpp"

namespace dms {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw InvalidArgument(std::string("BiasSignal: ") + what + " must be finite");
}

}  // namespace

BiasSignal::BiasSignal(Kind kind) : kind_(std::make_shared<const Kind>(std::move(kind))) {
  domain_ = range();
}

BiasSignal BiasSignal::constant(double v) {
  require_finite(v, "constant value");
  return BiasSignal(Constant{v});
}

BiasSignal BiasSignal::piecewise(std::vector<double> times, std::vector<double> values) {
  if (times.empty() || times.size() != values.size()) {
    throw InvalidArgument("BiasSignal::piecewise: need equally many (>= 1) times and values");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    require_finite(times[i], "segment time");
    require_finite(values[i], "segment value");
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw InvalidArgument("BiasSignal::piecewise: times must be strictly ascending");
    }
  }
  return BiasSignal(Piecewise{std::move(times), std::move(values), std::nullopt});
}

BiasSignal BiasSignal::zoh(std::vector<double> samples, double Ts, double t0) {
  if (!(Ts > 0) || !std::isfinite(Ts)) throw InvalidArgument("BiasSignal::zoh: Ts must be > 0");
  require_finite(t0, "t0");
  std::vector<double> times(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) times[j] = t0 + static_cast<double>(j) * Ts;
  BiasSignal s = piecewise(std::move(times), std::move(samples));
  auto pw = std::get<Piecewise>(*s.kind_);
  pw.Ts = Ts;
  return BiasSignal(std::move(pw));
}

BiasSignal BiasSignal::sinusoid(double offset, double amplitude, double frequency) {
  require_finite(offset, "offset");
  require_finite(amplitude, "amplitude");
  if (!(frequency > 0) || !std::isfinite(frequency)) {
    throw InvalidArgument("BiasSignal::sinusoid: frequency must be > 0");
  }
  return BiasSignal(Sinusoid{offset, amplitude, frequency});
}

BiasSignal BiasSignal::affine(double a, double k, const BiasSignal& inner) {
  require_finite(a, "affine offset");
  require_finite(k, "affine scale");
  return BiasSignal(Affine{a, k, std::make_shared<const BiasSignal>(inner)});
}

double BiasSignal::operator()(double t) const {
  return std::visit(
      Overloaded{
          [](const Constant& c) { return c.v; },
          [t](const Piecewise& p) {
            const auto it = std::upper_bound(p.times.begin(), p.times.end(), t);
            const auto i = it == p.times.begin() ? 0 : (it - p.times.begin()) - 1;
            return p.values[static_cast<std::size_t>(i)];
          },
          [t](const Sinusoid& s) {
            return s.offset + s.amplitude * std::cos(2.0 * std::numbers::pi * s.frequency * t);
          },
          [t](const Affine& a) { return a.a + a.k * (*a.inner)(t); },
      },
      *kind_);
}

DomainBounds BiasSignal::range() const {
  return std::visit(
      Overloaded{
          [](const Constant& c) { return DomainBounds(c.v, c.v); },
          [](const Piecewise& p) {
            const auto [lo, hi] = std::minmax_element(p.values.begin(), p.values.end());
            return DomainBounds(*lo, *hi);
          },
          [](const Sinusoid& s) {
            const double r = std::abs(s.amplitude);
            return DomainBounds(s.offset - r, s.offset + r);
          },
          [](const Affine& a) {
            const DomainBounds in = a.inner->range();
            const double x = a.a + a.k * in.a;
            const double y = a.a + a.k * in.b;
            return DomainBounds(std::min(x, y), std::max(x, y));
          },
      },
      *kind_);
}

BiasSignal BiasSignal::with_domain(const DomainBounds& D) const {
  const DomainBounds r = range();
  if (!D.contains(r)) {
    throw InvalidArgument("BiasSignal: range [" + std::to_string(r.a) + ", " + std::to_string(r.b) +
                          "] is not inside the declared domain [" + std::to_string(D.a) + ", " +
                          std::to_string(D.b) + "]");
  }
  BiasSignal out = *this;
  out.domain_ = D;
  return out;
}

bool BiasSignal::is_piecewise_constant() const {
  return std::visit(Overloaded{
                        [](const Constant&) { return true; },
                        [](const Piecewise&) { return true; },
                        [](const Sinusoid& s) { return s.amplitude == 0.0; },
                        [](const Affine& a) { return a.k == 0.0 || a.inner->is_piecewise_constant(); },
                    },
                    *kind_);
}

double BiasSignal::next_change_after(double t) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(Overloaded{
                        [](const Constant&) { return inf; },
                        [t](const Piecewise& p) {
                          const auto it = std::upper_bound(p.times.begin() + 1, p.times.end(), t);
                          return it == p.times.end() ? inf : *it;
                        },
                        [](const Sinusoid& s) {
                          if (s.amplitude != 0.0) {
                            throw InvalidArgument("next_change_after: signal is not piecewise constant");
                          }
                          return inf;
                        },
                        [t](const Affine& a) { return a.k == 0.0 ? inf : a.inner->next_change_after(t); },
                    },
                    *kind_);
}

std::optional<double> BiasSignal::period() const {
  return std::visit(Overloaded{
                        [](const Constant&) -> std::optional<double> { return std::nullopt; },
                        [](const Piecewise&) -> std::optional<double> { return std::nullopt; },
                        [](const Sinusoid& s) -> std::optional<double> { return 1.0 / s.frequency; },
                        [](const Affine& a) { return a.inner->period(); },
                    },
                    *kind_);
}

std::optional<double> BiasSignal::sample_period() const {
  return std::visit(Overloaded{
                        [](const Piecewise& p) { return p.Ts; },
                        [](const Affine& a) { return a.inner->sample_period(); },
                        [](const auto&) -> std::optional<double> { return std::nullopt; },
                    },
                    *kind_);
}

namespace {

double number(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key)) throw InvalidArgument("signal: missing key \"" + key + "\"");
  if (!j.at(key).is_number()) throw InvalidArgument("signal." + key + ": expected a number");
  return j.at(key).get<double>();
}

std::vector<double> numbers(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key)) throw InvalidArgument("signal: missing key \"" + key + "\"");
  const auto& a = j.at(key);
  if (!a.is_array()) throw InvalidArgument("signal." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : a) {
    if (!x.is_number()) throw InvalidArgument("signal." + key + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

void only_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : j.items()) {
    if (key == "kind" || key == "domain") continue;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw InvalidArgument("signal: unknown key \"" + key + "\" for kind \"" +
                            j.at("kind").get<std::string>() + "\"");
    }
  }
}

}  // namespace

BiasSignal signal_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw InvalidArgument("signal: expected an object with a string \"kind\"");
  }
  const std::string kind = j.at("kind").get<std::string>();
  BiasSignal s = BiasSignal::constant(0.0);
  if (kind == "constant") {
    only_keys(j, {"value"});
    s = BiasSignal::constant(number(j, "value"));
  } else if (kind == "piecewise") {
    only_keys(j, {"times", "values"});
    s = BiasSignal::piecewise(numbers(j, "times"), numbers(j, "values"));
  } else if (kind == "zoh") {
    only_keys(j, {"Ts", "t0", "samples", "file"});
    const double t0 = j.contains("t0") ? number(j, "t0") : 0.0;
    if (j.contains("file") == j.contains("samples")) {
      throw InvalidArgument("signal: zoh needs exactly one of \"samples\" or \"file\"");
    }
    if (j.contains("samples")) {
      s = BiasSignal::zoh(numbers(j, "samples"), number(j, "Ts"), t0);
    } else {
      if (!j.at("file").is_string()) throw InvalidArgument("signal.file: expected a path string");
      const auto path = base_dir / j.at("file").get<std::string>();
      const CsvTable t = read_csv_file(path);
      std::optional<double> Ts;
      for (const auto& c : t.comments) {
        if (c.rfind("Ts=", 0) == 0) {
          try {
            Ts = std::stod(c.substr(3));
          } catch (const std::exception&) {
            throw InvalidArgument("signal: bad Ts header in " + path.string());
          }
        }
      }
      if (j.contains("Ts")) {
        const double given = number(j, "Ts");
        if (Ts && *Ts != given) throw InvalidArgument("signal: Ts in config disagrees with " + path.string());
        Ts = given;
      }
      if (!Ts) throw InvalidArgument("signal: no \"# Ts=\" header in " + path.string());
      s = BiasSignal::zoh(t.column("V"), *Ts, t0);
    }
  } else if (kind == "sinusoid") {
    only_keys(j, {"offset", "amplitude", "frequency"});
    s = BiasSignal::sinusoid(number(j, "offset"), number(j, "amplitude"), number(j, "frequency"));
  } else if (kind == "affine") {
    only_keys(j, {"a", "k", "inner"});
    if (!j.contains("inner")) throw InvalidArgument("signal: affine needs \"inner\"");
    s = BiasSignal::affine(number(j, "a"), number(j, "k"), signal_from_json(j.at("inner"), base_dir));
  } else {
    throw InvalidArgument("signal.kind: unknown kind \"" + kind + "\"");
  }
  if (j.contains("domain")) {
    const auto d = numbers(j, "domain");
    if (d.size() != 2) throw InvalidArgument("signal.domain: expected [a, b]");
    s = s.with_domain(DomainBounds(d[0], d[1]));
  }
  return s;
}

}  // namespace dms
