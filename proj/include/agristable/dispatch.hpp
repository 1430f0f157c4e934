// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "agristable/scenario_config.hpp"

namespace agristable::cli {

enum class Command { optimize, compare, statics, settle, escrow, insure, all };

std::optional<Command> parse_command(std::string_view name) noexcept;
std::string_view to_string(Command c) noexcept;

/// Report file name -> contents, produced entirely in memory.
using ReportSet = std::map<std::string, std::string>;

/// Runs `command` and returns every report it produces. Throws the
/// originating module's Error on failure.
ReportSet run_command(const config::ScenarioConfig& config, Command command);

/// Writes all reports into `out_dir`. If any write fails the files already
/// written are removed before the exception propagates.
void write_reports(const ReportSet& reports, const std::filesystem::path& out_dir);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Full front door used by the CLI binary: parse, apply overrides, run,
/// write. Diagnostics go to `err`; the return value is the exit status.
struct Invocation {
    std::filesystem::path config;
    std::filesystem::path out;
    std::string command;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> mc_n;
};

int invoke(const Invocation& inv, std::ostream& err);

}  // namespace agristable::cli
