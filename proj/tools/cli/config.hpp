#pragma once

#include <filesystem>
#include <istream>
#include <string>

#include "faultline/engine.hpp"
#include "faultline/sim.hpp"

namespace faultline::cli {

/// Everything a config file can set. One global seed feeds the simulator
/// directly and the engine's sub-streams through fixed offsets.
struct AppConfig {
  EngineConfig engine;
  SimConfig sim;

  void set_seed(std::uint64_t seed) {
    engine.seed = seed;
    sim.seed = seed;
  }
};

/// Parses `key = value` lines with `#` comments. Unknown keys, malformed
/// values and out-of-bounds parameters throw Error{config}.
AppConfig parse_config(std::istream& in);

/// Throws Error{io} when the file cannot be opened.
AppConfig load_config(const std::filesystem::path& path);

/// Key list accepted by parse_config, for help output.
std::string config_keys_help();

}  // namespace faultline::cli
