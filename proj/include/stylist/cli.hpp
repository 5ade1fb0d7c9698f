#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace stylist::cli {

/// Runs one subcommand (`synth`, `rank`, `select`, `eval`, `probe`,
/// `sweep-spuriousness`). args[0] is the program name. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Reads a line-based `key = value` file; `#` starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const std::filesystem::path& path);

}  // namespace stylist::cli
