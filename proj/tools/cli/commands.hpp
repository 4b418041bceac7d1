#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>

namespace faultline::cli {

// Stable exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitCorruptStream = 4;
inline constexpr int kExitInsufficientData = 5;

using std::filesystem::path;

struct CommandIo {
  std::ostream& out;  // command results (eval report, tune result)
  std::ostream& err;  // one-line diagnostics
};

int cmd_simulate(const std::optional<path>& config, const path& out_csv, const path& truth_json,
                 std::optional<std::uint64_t> seed, CommandIo io);

int cmd_run(const std::optional<path>& config, const path& in_csv, const path& events_jsonl,
            std::optional<std::uint64_t> seed, CommandIo io);

/// theta_amp defaults to half the ground-truth echo amplitude.
int cmd_eval(const path& events_jsonl, const path& truth_json, std::optional<double> theta_amp, CommandIo io);

int cmd_tune(const std::optional<path>& config, const path& in_csv, std::optional<std::uint64_t> seed,
             CommandIo io);

}  // namespace faultline::cli
