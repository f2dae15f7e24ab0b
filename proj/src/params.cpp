#include "dms/params.hpp"

#include <cmath>
#include <string>

#include "dms/error.hpp"

namespace dms {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument("SwitchParams: " + what);
}

constexpr double kMeV = 1e-3;

}  // namespace

void SwitchParams::validate() const {
  for (double x : {gammaL_AB, gammaR_AB, kappa, chi, E_AB, E_PT, lambda, gamma, eta, sigma, T,
                   Gamma_AB}) {
    require(std::isfinite(x), "all parameters must be finite");
  }
  require(gammaL_AB >= 0, "gamma_L must be >= 0");
  require(gammaR_AB >= 0, "gamma_R must be >= 0");
  require(gammaL_AB + gammaR_AB > 0, "gamma_L + gamma_R must be > 0");
  require(kappa > 0, "kappa must be > 0");
  require(lambda > 0, "lambda must be > 0");
  require(T > 0, "T must be > 0");
  require(sigma > 0, "sigma must be > 0");
  require(gamma > 0, "gamma must be > 0");
  require(N >= 1, "N must be >= 1");
  require(eta >= 0 && eta <= 1, "eta must lie in [0, 1]");
  require(Gamma_AB >= 0, "Gamma_AB must be >= 0");
}

const char* to_string(MarcusDenominator d) {
  return d == MarcusDenominator::as_printed ? "as-printed" : "conventional-lambda";
}

MarcusDenominator marcus_denominator_from_string(const std::string& s) {
  if (s == "as-printed") return MarcusDenominator::as_printed;
  if (s == "conventional-lambda") return MarcusDenominator::conventional_lambda;
  throw InvalidArgument("marcus_denominator must be \"as-printed\" or \"conventional-lambda\", got \"" +
                        s + "\"");
}

const char* to_string(State s) { return s == State::AB ? "AB" : "ABbar"; }

nlohmann::json params_to_json(const SwitchParams& p) {
  return {
      {"Gamma_AB", p.Gamma_AB / kMeV},
      {"sigma", p.sigma},
      {"eta", p.eta},
      {"E_AB", p.E_AB},
      {"E_PT", p.E_PT},
      {"kappa", p.kappa},
      {"chi", p.chi},
      {"lambda", p.lambda},
      {"gamma", p.gamma},
      {"gamma_L", p.gammaL_AB / kMeV},
      {"gamma_R", p.gammaR_AB / kMeV},
      {"N", p.N},
      {"T", p.T},
      {"marcus_denominator", to_string(p.marcus_denominator)},
  };
}

SwitchParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("params: expected a JSON object");
  SwitchParams p;
  auto number = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) throw InvalidArgument("params." + key + ": expected a number");
    return v.get<double>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "Gamma_AB") p.Gamma_AB = number(v, key) * kMeV;
    else if (key == "sigma") p.sigma = number(v, key);
    else if (key == "eta") p.eta = number(v, key);
    else if (key == "E_AB") p.E_AB = number(v, key);
    else if (key == "E_PT") p.E_PT = number(v, key);
    else if (key == "kappa") p.kappa = number(v, key);
    else if (key == "chi") p.chi = number(v, key);
    else if (key == "lambda") p.lambda = number(v, key);
    else if (key == "gamma") p.gamma = number(v, key);
    else if (key == "gamma_L") p.gammaL_AB = number(v, key) * kMeV;
    else if (key == "gamma_R") p.gammaR_AB = number(v, key) * kMeV;
    else if (key == "N") {
      if (!v.is_number_integer()) throw InvalidArgument("params.N: expected an integer");
      p.N = v.get<int>();
    } else if (key == "T") p.T = number(v, key);
    else if (key == "marcus_denominator") {
      if (!v.is_string()) throw InvalidArgument("params.marcus_denominator: expected a string");
      p.marcus_denominator = marcus_denominator_from_string(v.get<std::string>());
    } else {
      throw InvalidArgument("params: unknown key \"" + key + "\"");
    }
  }
  p.validate();
  return p;
}

}  // namespace dms
