#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace stylist::text {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

/// Strict parse of a whole field; throws Error naming `what` on failure.
double parse_double(std::string_view field, std::string_view what);
long long parse_int(std::string_view field, std::string_view what);

std::vector<std::string_view> split(std::string_view line, char delim = ',');
std::string_view trim(std::string_view s);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace stylist::text
