#ifndef TOPOSPAT_TEXT_IO_HPP
#define TOPOSPAT_TEXT_IO_HPP

#include <string>
#include <string_view>
#include <vector>

// Small helpers shared by the delimited-file readers and writers.

namespace topospat::text {

/// Tab unless the line contains a comma and no tab.
char detect_delimiter(std::string_view header);

std::vector<std::string_view> split(std::string_view line, char delim);

/// Strip a trailing '\r' (files written on Windows).
std::string_view chomp(std::string_view line);

/// Parse a complete field as a double; returns false on any trailing junk.
bool parse_double(std::string_view field, double& out);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Lines without their terminators; trailing empty lines are dropped.
std::vector<std::string_view> lines(const std::string& contents);

std::string read_file(const std::string& path);

/// Write through a temporary file and rename it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

} // namespace topospat::text

#endif
