#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"

namespace {

const char* kCalibrationNote =
    "The engine treats the first engine.calib_frames frames of every stream as\n"
    "healthy. Start runs on a known-good machine state.";

}  // namespace

int main(int argc, char** argv) {
  using namespace faultline::cli;
  CLI::App app{"faultline: unsupervised streaming fault prediction"};
  app.footer(std::string(kCalibrationNote) + "\n\nConfig keys:\n" + config_keys_help());
  app.require_subcommand(1);

  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::string in_path, out_path, truth_path, events_path;
  std::optional<double> theta_amp;

  auto* sim = app.add_subcommand("simulate", "generate a rig stream (CSV) and its ground truth (JSON)");
  sim->add_option("--config", config, "key = value config file");
  sim->add_option("--out", out_path, "sample CSV to write")->required();
  sim->add_option("--truth", truth_path, "ground-truth JSON to write")->required();
  sim->add_option("--seed", seed, "overrides the config seed");

  auto* run = app.add_subcommand("run", "run the engine over a sample CSV, writing JSON Lines events");
  run->add_option("--config", config, "key = value config file");
  run->add_option("--in", in_path, "sample CSV")->required();
  run->add_option("--events", events_path, "event file to write")->required();
  run->add_option("--seed", seed, "overrides the config seed");

  auto* eval = app.add_subcommand("eval", "score an event file against ground truth");
  eval->add_option("--events", events_path, "event file")->required();
  eval->add_option("--truth", truth_path, "ground-truth JSON")->required();
  eval->add_option("--theta-amp", theta_amp, "echo amplitude defining the fault time (default A_max / 2)");

  auto* tune = app.add_subcommand("tune", "run the engine, then grid-search (C, gamma) on its labeled buffer");
  tune->add_option("--config", config, "key = value config file");
  tune->add_option("--in", in_path, "sample CSV")->required();
  tune->add_option("--seed", seed, "overrides the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const CommandIo io{std::cout, std::cerr};
  const auto cfg_path = config ? std::optional<path>(*config) : std::nullopt;
  if (sim->parsed()) return cmd_simulate(cfg_path, out_path, truth_path, seed, io);
  if (run->parsed()) return cmd_run(cfg_path, in_path, events_path, seed, io);
  if (eval->parsed()) return cmd_eval(events_path, truth_path, theta_amp, io);
  if (tune->parsed()) return cmd_tune(cfg_path, in_path, seed, io);
  return kExitConfig;
}
