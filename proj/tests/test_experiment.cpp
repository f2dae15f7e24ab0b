#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dms/csv.hpp"
#include "dms/error.hpp"
#include "dms/experiment.hpp"

using namespace dms;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dms_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("csv round trip") {
  CsvTable t;
  t.comments = {"Ts=0.5"};
  t.header = {"a", "b"};
  t.columns = {{0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}, {1e-17, 0.0, -0.0, 123456789.0}};
  std::stringstream s;
  write_csv(s, t);
  const std::string text = s.str();
  CHECK(text.back() == '\n');
  CHECK(text.rfind("# Ts=0.5\na,b\n", 0) == 0);
  const CsvTable back = read_csv(s);
  CHECK(back.header == t.header);
  CHECK(back.comments == t.comments);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t r = 0; r < 4; ++r) CHECK(back.columns[c][r] == t.columns[c][r]);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK_THROWS_AS(back.column("c"), InvalidArgument);

  CsvTable empty;
  empty.header = {"t", "P_AB"};
  empty.columns = {{}, {}};
  std::stringstream e;
  write_csv(e, empty);
  CHECK(e.str() == "t,P_AB\n");
}

TEST_CASE("experiment config validation") {
  CHECK_THROWS_WITH_AS(experiment_from_json({{"experiment", "iv-sweeps"}}), doctest::Contains("iv-sweeps"),
                       InvalidArgument);
  CHECK_THROWS_WITH_AS(experiment_from_json({{"experiment", "steady-state"}, {"v_rang", {0, 1, 3}}}),
                       doctest::Contains("v_rang"), InvalidArgument);
  CHECK_THROWS_WITH_AS(experiment_from_json({{"experiment", "steady-state"}, {"v_range", {1, 0, 3}}}),
                       doctest::Contains("v_range"), InvalidArgument);
  CHECK_THROWS_WITH_AS(experiment_from_json({{"experiment", "steady-state"}, {"params", {{"lamda", 1}}}}),
                       doctest::Contains("lamda"), InvalidArgument);
  CHECK_THROWS_WITH_AS(experiment_from_json({{"experiment", "step-response"}, {"P0", 1.5}}),
                       doctest::Contains("P0"), InvalidArgument);
  CHECK_THROWS_WITH_AS(experiment_from_json({{"experiment", "sine-response"}, {"frequencies", {0.1, -1}}}),
                       doctest::Contains("frequencies"), InvalidArgument);
  CHECK_THROWS_WITH_AS(experiment_from_json({{"experiment", "dt-filter"}, {"Ts", 0.5}}), doctest::Contains("signal"),
                       InvalidArgument);
  CHECK_THROWS_WITH_AS(experiment_from_json({{"experiment", "verify"}, {"verify", {{"seeds", 1}}}}),
                       doctest::Contains("seeds"), InvalidArgument);
  CHECK_THROWS_WITH_AS(experiment_from_json({{"experiment", "step-response"}, {"current", 1}}),
                       doctest::Contains("current"), InvalidArgument);
  CHECK_THROWS_AS(experiment_from_json(nlohmann::json::array()), InvalidArgument);

  const ExperimentConfig c = experiment_from_json(
      {{"experiment", "steady-state"}, {"v_range", {-1, 1, 5}}, {"params", {{"T", 300.0}}}, {"output_path", "x"}});
  CHECK(c.experiment == ExperimentKind::steady_state);
  CHECK(c.params.T == 300.0);
  CHECK(c.output_path == "x");
  CHECK(experiment_from_json(c.to_json()).to_json() == c.to_json());
}

TEST_CASE("overrides") {
  nlohmann::json doc{{"experiment", "steady-state"}};
  apply_override(doc, "params.T=310");
  apply_override(doc, "v_range=[0,1,3]");
  apply_override(doc, "quadrature.method=monte-carlo");
  CHECK(doc["params"]["T"] == 310);
  CHECK(doc["v_range"].size() == 3);
  CHECK(doc["quadrature"]["method"] == "monte-carlo");
  CHECK_THROWS_AS(apply_override(doc, "novalue"), InvalidArgument);
  CHECK_THROWS_AS(apply_override(doc, "=3"), InvalidArgument);
  CHECK_THROWS_AS(apply_override(doc, "params..T=3"), InvalidArgument);
  CHECK_THROWS_AS(apply_override(doc, "params.T.x=3"), InvalidArgument);
}

TEST_CASE("steady-state run writes csv and manifest") {
  const fs::path out = scratch("steady");
  const ExperimentConfig c = experiment_from_json({{"experiment", "steady-state"}, {"v_range", {-2, 2, 9}}});
  const RunResult r = run_experiment(c, out, 2);
  CHECK(r.exit_code == 0);
  REQUIRE(r.outputs.size() == 1);
  CHECK(r.outputs[0].rows == 9);
  const CsvTable t = read_csv_file(out / "steady_state.csv");
  CHECK(t.header == std::vector<std::string>{"v", "P_star_AB", "P_star_ABbar", "I_star"});
  CHECK(t.column("v").back() == 2.0);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    CHECK(t.column("P_star_AB")[i] + t.column("P_star_ABbar")[i] == doctest::Approx(1.0));
  }
  std::ifstream m(out / "manifest.json");
  const nlohmann::json manifest = nlohmann::json::parse(m);
  CHECK(manifest.at("experiment") == "steady-state");
  CHECK(manifest.at("outputs")[0].at("file") == "steady_state.csv");
  CHECK(manifest.contains("wall_time_s"));
  CHECK(manifest.at("config").at("params").at("T") == 298.15);

  // Byte-identical on a rerun with a different thread count.
  const fs::path again = scratch("steady_again");
  run_experiment(c, again, 1);
  CHECK(slurp(out / "steady_state.csv") == slurp(again / "steady_state.csv"));
  fs::remove_all(out);
  fs::remove_all(again);
}

TEST_CASE("step and sine runs") {
  const fs::path out = scratch("traj");
  const ExperimentConfig step = experiment_from_json(
      {{"experiment", "step-response"}, {"biases", {-2, 1}}, {"P0", 0.5}, {"output_dt", 1.0}, {"current", true}});
  const RunResult r = run_experiment(step, out);
  CHECK(r.outputs.size() == 2);
  const CsvTable t = read_csv_file(out / "step_response_v-2.csv");
  CHECK(t.header.back() == "I_avg");
  CHECK(t.column("P_AB").front() == 0.5);

  const ExperimentConfig sine = experiment_from_json(
      {{"experiment", "sine-response"}, {"frequencies", {0.2}}, {"t_end", 20.0}, {"output_dt", 0.5}});
  run_experiment(sine, out);
  const CsvTable s = read_csv_file(out / "sine_response_f0.2.csv");
  CHECK(s.rows() == 41);
  CHECK(s.column("V")[0] == doctest::Approx(1.5));
  CHECK(s.column("P_AB")[0] == 0.0);
  fs::remove_all(out);
}

TEST_CASE("dt-filter run resolves sample files against the config directory") {
  const fs::path dir = scratch("filter");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "v.csv");
    f << "# Ts=0.5\nV\n";
    for (int i = 0; i < 200; ++i) f << 1.0 + 0.4 * std::sin(0.3 * i) << '\n';
  }
  const nlohmann::json doc{{"experiment", "dt-filter"},
                           {"signal", {{"kind", "zoh"}, {"file", "v.csv"}, {"domain", {0.5, 1.5}}}},
                           {"Ts", 0.5},
                           {"k_range", {150, 160}}};
  const ExperimentConfig c = experiment_from_json(doc, dir);
  const RunResult r = run_experiment(c, dir / "out");
  CHECK(r.outputs.at(0).rows == 11);
  const CsvTable t = read_csv_file(dir / "out" / "dt_filter.csv");
  CHECK(t.header == std::vector<std::string>{"k", "t", "V_k", "Y_k"});
  fs::remove_all(dir);
}
