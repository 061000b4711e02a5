#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace streamdec {

// Locale-independent decimal formatting with at least `min_decimals`
// fractional digits; more digits are added until the value round-trips.
std::string format_double(double value, int min_decimals = 3);

// Locale-independent parse of the whole of `text`. Accepts "inf"/"+inf".
double parse_double(std::string_view text);
long long parse_int(std::string_view text);
std::uint64_t parse_uint64(std::string_view text);

std::vector<std::string_view> split_whitespace(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

std::string join(const std::vector<std::string> &parts, std::string_view sep);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path &path, std::string_view content);
std::string read_file(const std::filesystem::path &path);

} // namespace streamdec
