#pragma once

// Batch front end: one subcommand per computation, flat key = value configs, JSON summary
// plus CSV data in an output directory.

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace khg::cli {

struct Field {
    std::string key;
    std::string fallback;  // default value; empty means unset
    std::string help;
};

struct Command {
    std::string name;
    std::string help;
    std::vector<Field> fields;
};

const std::vector<Command>& commands();
const Command& command(const std::string& name);

struct RunConfig {
    std::string command;
    std::map<std::string, std::string> params;  // resolved: defaults, then config file, then flags
    std::string out_dir = ".";
};

/// Flat "key = value" text, '#' starts a comment. ConfigError with the line number on
/// malformed lines or keys the command does not know.
std::map<std::string, std::string> parse_config_text(const std::string& text, const Command& cmd);

/// Defaults overlaid with `overrides`; ConfigError on unknown keys or non-positive tolerances.
RunConfig resolve(const std::string& command, const std::map<std::string, std::string>& overrides,
                  const std::string& out_dir);

/// Runs the command, writes summary.json and the CSV files into out_dir and returns the
/// summary text. Library errors propagate as khg::Error.
std::string execute(const RunConfig& cfg);

/// Full command line handling; returns the process exit code (0, 2 config, 3 numerical,
/// 4 precondition).
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace khg::cli
