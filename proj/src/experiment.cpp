#include "dms/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dms/csv.hpp"
#include "dms/dynamics.hpp"
#include "dms/error.hpp"
#include "dms/parallel.hpp"
#include "dms/transport.hpp"
#include "dms/verify.hpp"

namespace dms {

namespace {

constexpr const char* kVersion = "dms 0.1.0";

const std::vector<std::pair<ExperimentKind, const char*>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, const char*>> names{
      {ExperimentKind::iv_sweep, "iv-sweep"},           {ExperimentKind::bridge_pop, "bridge-pop"},
      {ExperimentKind::steady_state, "steady-state"},   {ExperimentKind::step_response, "step-response"},
      {ExperimentKind::sine_response, "sine-response"}, {ExperimentKind::dt_filter, "dt-filter"},
      {ExperimentKind::verify, "verify"}};
  return names;
}

}  // namespace

const char* to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kind_names()) {
    if (kind == k) return name;
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (const auto& [kind, name] : kind_names()) {
    if (s == name) return kind;
  }
  throw InvalidArgument("experiment: unknown experiment \"" + s + "\"");
}

// ---------------------------------------------------------------------------
// Typed views of the experiment-specific options

namespace {

double number(const nlohmann::json& o, const char* key, double fallback) {
  if (!o.contains(key)) return fallback;
  if (!o.at(key).is_number()) throw InvalidArgument(std::string(key) + ": expected a number");
  return o.at(key).get<double>();
}

std::optional<double> optional_positive(const nlohmann::json& o, const char* key) {
  if (!o.contains(key)) return std::nullopt;
  const double x = number(o, key, 0.0);
  if (!(x > 0)) throw InvalidArgument(std::string(key) + ": expected a number > 0");
  return x;
}

std::vector<double> number_list(const nlohmann::json& o, const char* key, std::vector<double> fallback) {
  if (!o.contains(key)) return fallback;
  const auto& a = o.at(key);
  if (!a.is_array() || a.empty()) throw InvalidArgument(std::string(key) + ": expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& x : a) {
    if (!x.is_number()) throw InvalidArgument(std::string(key) + ": expected a non-empty array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

bool flag(const nlohmann::json& o, const char* key) {
  if (!o.contains(key)) return false;
  if (!o.at(key).is_boolean()) throw InvalidArgument(std::string(key) + ": expected true or false");
  return o.at(key).get<bool>();
}

double probability(const nlohmann::json& o, const char* key, double fallback) {
  const double p = number(o, key, fallback);
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument(std::string(key) + ": expected a value in [0, 1]");
  return p;
}

void allow_only(const nlohmann::json& o, ExperimentKind kind, std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, _] : o.items()) {
    if (!allowed.count(key)) {
      throw InvalidArgument("unknown key \"" + key + "\" for experiment " + to_string(kind));
    }
  }
}

std::vector<double> bias_grid(const nlohmann::json& o) {
  if (o.contains("v_grid") && o.contains("v_range")) throw InvalidArgument("v_grid and v_range are exclusive");
  if (o.contains("v_grid")) {
    auto v = number_list(o, "v_grid", {});
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (!(v[i] > v[i - 1])) throw InvalidArgument("v_grid: must be strictly ascending");
    }
    return v;
  }
  const auto& r = o.contains("v_range") ? o.at("v_range") : nlohmann::json::array({-2.5, 2.5, 251});
  if (!r.is_array() || r.size() != 3 || !r[0].is_number() || !r[1].is_number() || !r[2].is_number_integer()) {
    throw InvalidArgument("v_range: expected [v_min, v_max, n]");
  }
  const double lo = r[0].get<double>(), hi = r[1].get<double>();
  const long n = r[2].get<long>();
  if (!(hi > lo) || n < 2) throw InvalidArgument("v_range: requires v_min < v_max and n >= 2");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

struct StepOptions {
  std::vector<double> biases;
  double P0;
  std::optional<double> t_end, output_dt;
  bool current;
};

StepOptions step_options(const nlohmann::json& o) {
  allow_only(o, ExperimentKind::step_response, {"biases", "P0", "t_end", "output_dt", "current"});
  return {number_list(o, "biases", {-2, -0.8, -0.6, -0.55, 0.5, 1, 1.65, 2}), probability(o, "P0", 0.5),
          optional_positive(o, "t_end"), optional_positive(o, "output_dt"), flag(o, "current")};
}

struct SineOptions {
  double offset, amplitude;
  std::vector<double> frequencies;
  double P0;
  std::optional<double> t_end, output_dt;
  bool current;
  int table_nodes;
};

SineOptions sine_options(const nlohmann::json& o) {
  allow_only(o, ExperimentKind::sine_response,
             {"offset", "amplitude", "frequencies", "P0", "t_end", "output_dt", "current", "table_nodes"});
  SineOptions s{number(o, "offset", 1.0),
                number(o, "amplitude", 0.5),
                number_list(o, "frequencies", {0.01, 0.05, 0.1, 0.2}),
                probability(o, "P0", 0.0),
                optional_positive(o, "t_end"),
                optional_positive(o, "output_dt"),
                flag(o, "current"),
                static_cast<int>(number(o, "table_nodes", 201))};
  for (double f : s.frequencies) {
    if (!(f > 0)) throw InvalidArgument("frequencies: expected values > 0");
  }
  if (s.table_nodes < 4) throw InvalidArgument("table_nodes: expected at least 4");
  return s;
}

struct FilterOptions {
  nlohmann::json signal;
  double Ts;
  long k_first, k_last;
  double tol;
};

FilterOptions filter_options(const nlohmann::json& o) {
  allow_only(o, ExperimentKind::dt_filter, {"signal", "Ts", "k_range", "tol"});
  if (!o.contains("signal")) throw InvalidArgument("signal: required for dt-filter");
  const auto Ts = optional_positive(o, "Ts");
  if (!Ts) throw InvalidArgument("Ts: required for dt-filter");
  const auto& k = o.contains("k_range") ? o.at("k_range") : nlohmann::json();
  if (!k.is_array() || k.size() != 2 || !k[0].is_number_integer() || !k[1].is_number_integer() ||
      k[0].get<long>() > k[1].get<long>()) {
    throw InvalidArgument("k_range: expected [k_first, k_last] with k_first <= k_last");
  }
  const double tol = number(o, "tol", 1e-10);
  if (!(tol > 0 && tol < 1)) throw InvalidArgument("tol: expected a value in (0, 1)");
  return {o.at("signal"), *Ts, k[0].get<long>(), k[1].get<long>(), tol};
}

struct VerifyOptions {
  DomainBounds D;
  SuiteConfig suite;
};

VerifyOptions verify_options(const nlohmann::json& o) {
  allow_only(o, ExperimentKind::verify, {"domain", "verify"});
  const auto d = number_list(o, "domain", {-2.0, 2.0});
  if (d.size() != 2) throw InvalidArgument("domain: expected [a, b]");
  return {DomainBounds(d[0], d[1]), suite_config_from_json(o.value("verify", nlohmann::json::object()))};
}

void validate_options(ExperimentKind kind, const nlohmann::json& o) {
  switch (kind) {
    case ExperimentKind::iv_sweep:
    case ExperimentKind::bridge_pop:
    case ExperimentKind::steady_state:
      allow_only(o, kind, {"v_grid", "v_range"});
      bias_grid(o);
      break;
    case ExperimentKind::step_response: step_options(o); break;
    case ExperimentKind::sine_response: sine_options(o); break;
    case ExperimentKind::dt_filter: filter_options(o); break;
    case ExperimentKind::verify: verify_options(o); break;
  }
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j = options;
  j["experiment"] = to_string(experiment);
  j["params"] = params_to_json(params);
  j["quadrature"] = quadrature_to_json(quadrature);
  j["output_path"] = output_path;
  return j;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InvalidArgument("config: expected a JSON object");
  ExperimentConfig c;
  c.base_dir = base_dir;
  if (!j.contains("experiment") || !j.at("experiment").is_string()) {
    throw InvalidArgument("experiment: required string key");
  }
  c.experiment = experiment_kind_from_string(j.at("experiment").get<std::string>());
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "experiment") continue;
      if (key == "params") c.params = params_from_json(v);
      else if (key == "quadrature") c.quadrature = quadrature_from_json(v);
      else if (key == "output_path") {
        if (!v.is_string()) throw InvalidArgument("expected a string");
        c.output_path = v.get<std::string>();
      } else c.options[key] = v;
    } catch (const InvalidArgument& e) {
      const std::string what = e.what();
      throw InvalidArgument(what.rfind(key, 0) == 0 ? what : key + ": " + what);
    }
  }
  validate_options(c.experiment, c.options);
  return c;
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw InvalidArgument("--set expects key=value, got \"" + assignment + "\"");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  nlohmann::json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw InvalidArgument("--set: empty path component in \"" + path + "\"");
    if (!node->is_object()) throw InvalidArgument("--set: \"" + path + "\" descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = nlohmann::json::object();
    start = dot + 1;
  }
}

// ---------------------------------------------------------------------------
// Runners

namespace {

struct Writer {
  std::filesystem::path dir;
  std::vector<OutputFile> files;

  void csv(const std::string& name, const CsvTable& t) {
    write_csv_file(dir / name, t);
    files.push_back({name, t.rows()});
  }
  void json(const std::string& name, const nlohmann::json& j, std::size_t rows) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + (dir / name).string());
    out << j.dump(2) << '\n';
    files.push_back({name, rows});
  }
};

RunResult sweep(const ExperimentConfig& cfg, Writer& w, int threads) {
  const std::vector<double> v = bias_grid(cfg.options);
  const std::size_t n = v.size();
  CsvTable t;
  if (cfg.experiment == ExperimentKind::bridge_pop) {
    std::vector<double> a(n), b(n);
    parallel_for(n, threads, [&](std::size_t i) {
      const BridgePopulation p = bridge_populations(v[i], cfg.params, cfg.quadrature);
      a[i] = p.b_AB;
      b[i] = p.b_ABbar;
    });
    t.header = {"v", "b_AB", "b_ABbar"};
    t.columns = {v, a, b};
    w.csv("bridge_population.csv", t);
  } else if (cfg.experiment == ExperimentKind::iv_sweep) {
    std::vector<double> a(n), b(n), sa(n), sb(n);
    parallel_for(2 * n, threads, [&](std::size_t job) {
      const std::size_t i = job / 2;
      const State s = job % 2 == 0 ? State::AB : State::ABbar;
      const IntegralResult r = state_current_result(v[i], s, cfg.params, cfg.quadrature);
      (s == State::AB ? a : b)[i] = r.value;
      (s == State::AB ? sa : sb)[i] = r.standard_error;
    });
    t.header = {"v", "I_AB", "I_ABbar"};
    t.columns = {v, a, b};
    if (cfg.quadrature.method == QuadratureMethod::monte_carlo) {
      t.header.insert(t.header.end(), {"I_AB_stderr", "I_ABbar_stderr"});
      t.columns.push_back(sa);
      t.columns.push_back(sb);
    }
    w.csv("iv_sweep.csv", t);
  } else {
    const RateFunction rates = direct_rates(cfg.params, cfg.quadrature);
    std::vector<double> P(n), Q(n), I(n);
    parallel_for(n, threads, [&](std::size_t i) {
      P[i] = steady_state(v[i], rates);
      Q[i] = 1.0 - P[i];
      I[i] = average_current(v[i], P[i], cfg.params, cfg.quadrature);
    });
    t.header = {"v", "P_star_AB", "P_star_ABbar", "I_star"};
    t.columns = {v, P, Q, I};
    w.csv("steady_state.csv", t);
  }
  return {w.files, 0, std::to_string(n) + " bias points"};
}

std::string tag(double x) { return format_double(x); }

RunResult step_response(const ExperimentConfig& cfg, Writer& w, int threads) {
  const StepOptions o = step_options(cfg.options);
  const auto [lo, hi] = std::minmax_element(o.biases.begin(), o.biases.end());
  const DomainBounds D(*lo, *hi);
  const RateFunction rates = direct_rates(cfg.params, cfg.quadrature);
  const double t_end = o.t_end ? *o.t_end : 10.0 / contraction_rate_nu(D, rates).nu;
  std::vector<CsvTable> tables(o.biases.size());
  parallel_for(o.biases.size(), threads, [&](std::size_t i) {
    const double v = o.biases[i];
    Trajectory tr = propagate({0.0, o.P0}, BiasSignal::constant(v), t_end, o.output_dt.value_or(0.0), rates);
    if (o.current) {
      const double a = state_current(v, State::AB, cfg.params, cfg.quadrature);
      const double b = state_current(v, State::ABbar, cfg.params, cfg.quadrature);
      Eigen::VectorXd I(tr.size());
      for (Eigen::Index k = 0; k < tr.size(); ++k) I(k) = average_current(a, b, std::clamp(tr.P_AB(k), 0.0, 1.0));
      tr.I_avg = I;
    }
    tables[i] = tr.to_csv();
  });
  for (std::size_t i = 0; i < tables.size(); ++i) {
    w.csv("step_response_v" + tag(o.biases[i]) + ".csv", tables[i]);
  }
  return {w.files, 0, std::to_string(o.biases.size()) + " trajectories, t_end = " + tag(t_end) + " s"};
}

RunResult sine_response(const ExperimentConfig& cfg, Writer& w, int threads) {
  const SineOptions o = sine_options(cfg.options);
  const BiasSignal probe = BiasSignal::sinusoid(o.offset, o.amplitude, o.frequencies.front());
  const DomainBounds D = probe.range();
  const RateFunction rates = D.width() > 0 ? tabulated_rates(cfg.params, cfg.quadrature, D, 0.01, 1e-10, threads)
                                           : direct_rates(cfg.params, cfg.quadrature);
  const double nu = contraction_rate_nu(D, rates).nu;
  std::optional<CurrentTable> table;
  if (o.current && D.width() > 0) {
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(o.table_nodes, D.a, D.b);
    table = CurrentTable::build(grid, cfg.params, cfg.quadrature, threads);
  }
  std::vector<CsvTable> tables(o.frequencies.size());
  parallel_for(o.frequencies.size(), threads, [&](std::size_t i) {
    const double f = o.frequencies[i];
    const BiasSignal s = BiasSignal::sinusoid(o.offset, o.amplitude, f);
    const double t_end = o.t_end ? *o.t_end : 5.0 / nu + 3.0 / f;
    Trajectory tr = propagate({0.0, o.P0}, s, t_end, o.output_dt.value_or(0.0), rates);
    if (o.current) {
      Eigen::VectorXd I(tr.size());
      for (Eigen::Index k = 0; k < tr.size(); ++k) {
        const double v = tr.V(k);
        const auto [a, b] = table ? table->lookup(std::clamp(v, D.a, D.b))
                                  : std::pair{state_current(v, State::AB, cfg.params, cfg.quadrature),
                                              state_current(v, State::ABbar, cfg.params, cfg.quadrature)};
        I(k) = average_current(a, b, std::clamp(tr.P_AB(k), 0.0, 1.0));
      }
      tr.I_avg = I;
    }
    tables[i] = tr.to_csv();
  });
  for (std::size_t i = 0; i < tables.size(); ++i) w.csv("sine_response_f" + tag(o.frequencies[i]) + ".csv", tables[i]);
  if (table) {
    std::ofstream out(w.dir / "current_table.csv", std::ios::binary);
    table->write_csv(out);
    w.files.push_back({"current_table.csv", static_cast<std::size_t>(table->v_grid().size())});
  }
  return {w.files, 0, std::to_string(o.frequencies.size()) + " trajectories"};
}

RunResult filter(const ExperimentConfig& cfg, Writer& w) {
  const FilterOptions o = filter_options(cfg.options);
  const BiasSignal s = signal_from_json(o.signal, cfg.base_dir);
  const DomainBounds D = s.domain();
  const RateFunction rates = D.width() > 0 ? tabulated_rates(cfg.params, cfg.quadrature, D)
                                           : direct_rates(cfg.params, cfg.quadrature);
  const double nu = contraction_rate_nu(D, rates).nu;
  const FilterOutput out = dt_filter(s, o.k_first, o.k_last, o.Ts, rates, nu, o.tol);
  w.csv("dt_filter.csv", out.to_csv());
  return {w.files, 0, std::to_string(out.k.size()) + " filter outputs, depth " +
                          std::to_string(truncation_depth(nu, o.Ts, o.tol))};
}

RunResult verify(const ExperimentConfig& cfg, Writer& w, int threads) {
  VerifyOptions o = verify_options(cfg.options);
  const CheckContext ctx = CheckContext::standard(cfg.params, cfg.quadrature, o.D);
  const std::vector<CheckReport> reports = run_suite(ctx, o.suite, threads);
  nlohmann::json report = suite_report_json(reports);
  report["suite"] = o.suite.to_json();
  w.json("verify_report.json", report, reports.size());
  int passed = 0;
  std::string failed;
  for (const auto& r : reports) {
    if (r.pass) ++passed;
    else failed += (failed.empty() ? "" : ", ") + r.check_name;
  }
  std::string summary = std::to_string(passed) + "/" + std::to_string(reports.size()) + " checks passed";
  if (!failed.empty()) summary += " (failed: " + failed + ")";
  return {w.files, passed == static_cast<int>(reports.size()) ? 0 : 1, summary};
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, int threads) {
  if (threads < 1) throw InvalidArgument("threads: expected at least 1");
  cfg.params.validate();
  cfg.quadrature.validate();
  std::filesystem::create_directories(out_dir);
  const auto start = std::chrono::steady_clock::now();
  Writer w{out_dir, {}};
  RunResult result;
  switch (cfg.experiment) {
    case ExperimentKind::iv_sweep:
    case ExperimentKind::bridge_pop:
    case ExperimentKind::steady_state: result = sweep(cfg, w, threads); break;
    case ExperimentKind::step_response: result = step_response(cfg, w, threads); break;
    case ExperimentKind::sine_response: result = sine_response(cfg, w, threads); break;
    case ExperimentKind::dt_filter: result = filter(cfg, w); break;
    case ExperimentKind::verify: result = verify(cfg, w, threads); break;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& f : result.outputs) outputs.push_back({{"file", f.name}, {"rows", f.rows}});
  const nlohmann::json manifest{{"experiment", to_string(cfg.experiment)},
                                {"version", kVersion},
                                {"config", cfg.to_json()},
                                {"outputs", outputs},
                                {"threads", threads},
                                {"wall_time_s", seconds},
                                {"exit_code", result.exit_code}};
  std::ofstream(out_dir / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
  return result;
}

}  // namespace dms
