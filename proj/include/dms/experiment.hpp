#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dms/params.hpp"
#include "dms/quadrature.hpp"

namespace dms {

enum class ExperimentKind { iv_sweep, bridge_pop, steady_state, step_response, sine_response, dt_filter, verify };

const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

/// One experiment document. Common keys: experiment, params, quadrature,
/// output_path. The remaining keys are experiment specific and are checked
/// against the experiment's allowed set when parsed; they are kept in `options`.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::steady_state;
  SwitchParams params;
  QuadratureSpec quadrature;
  std::string output_path = ".";
  nlohmann::json options = nlohmann::json::object();
  /// Directory that relative file references resolve against.
  std::filesystem::path base_dir;

  nlohmann::json to_json() const;
};

/// Validates the whole document; errors name the offending key.
ExperimentConfig experiment_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Applies "a.b.c=value" to a JSON document; value is parsed as JSON when
/// possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

struct OutputFile {
  std::string name;
  std::size_t rows = 0;
};

struct RunResult {
  std::vector<OutputFile> outputs;
  int exit_code = 0;
  std::string summary;  // one line, without timing
};

/// Executes the experiment and writes its CSV/JSON outputs plus manifest.json
/// into out_dir (created if needed).
RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, int threads = 1);

}  // namespace dms
