#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dms/csv.hpp"
#include "dms/experiment.hpp"

using namespace dms;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = DMS_SOURCE_DIR;

// Columns agree to 1e-9 of their own scale, so the goldens survive compiler
// and libm differences while still catching any modelling change.
void compare(const fs::path& produced, const fs::path& golden) {
  INFO("file: " << golden.string());
  const CsvTable a = read_csv_file(produced);
  const CsvTable b = read_csv_file(golden);
  REQUIRE(a.header == b.header);
  REQUIRE(a.rows() == b.rows());
  for (std::size_t c = 0; c < b.columns.size(); ++c) {
    double scale = 0.0;
    for (double x : b.columns[c]) scale = std::max(scale, std::abs(x));
    double worst = 0.0;
    for (std::size_t r = 0; r < b.rows(); ++r) worst = std::max(worst, std::abs(a.columns[c][r] - b.columns[c][r]));
    INFO("column " << b.header[c]);
    CHECK(worst <= 1e-9 * scale);
  }
}

void run_and_compare(const std::string& stem) {
  const fs::path config = kSource / "configs" / (stem + ".json");
  std::ifstream in(config);
  const ExperimentConfig cfg = experiment_from_json(nlohmann::json::parse(in), config.parent_path());
  const fs::path out = fs::temp_directory_path() / ("dms_golden_" + stem);
  fs::remove_all(out);
  const RunResult r = run_experiment(cfg, out, 4);
  CHECK(r.exit_code == 0);
  const fs::path golden = kSource / "tests" / "golden" / stem;
  std::size_t seen = 0;
  for (const auto& f : r.outputs) {
    if (fs::path(f.name).extension() != ".csv") continue;
    REQUIRE(fs::exists(golden / f.name));
    compare(out / f.name, golden / f.name);
    ++seen;
  }
  std::size_t expected = 0;
  for (const auto& e : fs::directory_iterator(golden)) expected += e.path().extension() == ".csv";
  CHECK(seen == expected);
  fs::remove_all(out);
}

}  // namespace

TEST_CASE("fig1 iv sweep") { run_and_compare("fig1_iv_sweep"); }
TEST_CASE("fig2 bridge populations") { run_and_compare("fig2_bridge_pop"); }
TEST_CASE("fig3 steady state") { run_and_compare("fig3_steady_state"); }
TEST_CASE("fig4 step responses") { run_and_compare("fig4_step_response"); }
TEST_CASE("fig5 sine responses") { run_and_compare("fig5_sine_response"); }
TEST_CASE("fig6 sine responses with current") { run_and_compare("fig6_sine_current"); }
TEST_CASE("discrete filter") { run_and_compare("dt_filter_zoh"); }
