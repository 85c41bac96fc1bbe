#pragma once

// Command-line front end.  Every command reads an optional flat JSON config
// (--config), applies flags on top, writes <out_dir>/<prefix>.csv plus a
// JSON sidecar and, with --plot, an SVG.
//
// Exit status: 0 success, 2 invalid input, 3 acceptance band missed under
// --assert, 1 anything else.

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace pmlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitBand = 3;

/// Effective configuration of one command after file and flag merging.
struct RunConfig {
    std::string command;
    nlohmann::json values; // flat, every key of the command present
};

/// Keys accepted by a command, in the order they are documented.
[[nodiscard]] std::vector<std::string> command_keys(const std::string& command);

/// Default configuration of a command; alpha-dependent defaults are resolved
/// against `alpha`.
[[nodiscard]] nlohmann::json default_config(const std::string& command, double alpha);

/// Defaults, then the file, then explicit flag values (already typed).
/// Throws std::invalid_argument naming the offending field.
[[nodiscard]] RunConfig merge_config(const std::string& command, const nlohmann::json& file,
                                     const nlohmann::json& flags);

/// 16 hex digits of a 64-bit FNV-1a hash of the canonical config dump.
[[nodiscard]] std::string config_hash(const RunConfig& config);

/// Runs a merged configuration; returns the exit status.
int execute(const RunConfig& config);

/// Full front end: argv[0] is skipped.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

} // namespace pmlab::cli
