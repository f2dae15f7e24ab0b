// dms: experiment runner for the molecular switch model.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dms/error.hpp"
#include "dms/experiment.hpp"

namespace {

nlohmann::json load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dms::InvalidArgument("--config: cannot open " + path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw dms::InvalidArgument("--config: " + path + " is not valid JSON");
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switch-model experiments: sweeps, trajectories, filters and verification"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "Experiment JSON document")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (overrides output_path)");
  app.add_option("--seed", seed, "Seed for Monte Carlo quadrature and random test signals");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--set", overrides, "Override a config key, e.g. --set params.T=300")->take_all();

  const std::pair<const char*, const char*> commands[] = {
      {"iv-sweep", "State currents over a bias grid"},
      {"bridge-pop", "Average bridge populations over a bias grid"},
      {"steady-state", "Steady-state probability and current over a bias grid"},
      {"step-response", "Trajectories under constant biases"},
      {"sine-response", "Trajectories under sinusoidal biases"},
      {"dt-filter", "Discrete-time fading-memory filter of a sampled signal"},
      {"verify", "Run the theorem check suite"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  bool running = false;
  try {
    nlohmann::json doc = config_path.empty() ? nlohmann::json::object() : load_document(config_path);
    if (!doc.is_object()) throw dms::InvalidArgument("config: expected a JSON object");
    if (doc.contains("experiment") && doc["experiment"] != command) {
      throw dms::InvalidArgument("experiment: config declares \"" + doc["experiment"].dump() +
                                 "\" but the subcommand is " + command);
    }
    doc["experiment"] = command;
    for (const auto& o : overrides) dms::apply_override(doc, o);
    if (seed) {
      doc["quadrature"]["seed"] = *seed;
      if (command == "verify") doc["verify"]["seed"] = *seed;
    }
    const std::filesystem::path base =
        config_path.empty() ? std::filesystem::current_path() : std::filesystem::path(config_path).parent_path();
    dms::ExperimentConfig cfg = dms::experiment_from_json(doc, base);
    if (!out_dir.empty()) cfg.output_path = out_dir;

    running = true;
    const auto start = std::chrono::steady_clock::now();
    const dms::RunResult r = dms::run_experiment(cfg, cfg.output_path, threads);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::size_t rows = 0;
    for (const auto& f : r.outputs) rows += f.rows;
    std::printf("%s: %s; %zu rows in %zu files under %s (%.2f s)\n", command.c_str(), r.summary.c_str(), rows,
                r.outputs.size(), cfg.output_path.c_str(), seconds);
    return r.exit_code;
  } catch (const std::exception& e) {
    if (!running) {
      std::cerr << "dms " << command << ": invalid configuration: " << e.what() << '\n';
      return 2;
    }
    std::cerr << "dms " << command << ": " << e.what() << '\n';
    return 3;
  }
}
