#pragma once

// Plain-text helpers shared by the config, manifest, label and prediction
// formats.

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crackbench/raster.hpp"

namespace crackbench::textio {

// "key=value" lines; blank lines and lines starting with '#' are skipped.
// Surrounding whitespace is trimmed. Throws InvalidArgument (with the line
// number) on a line without '='.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split_ws(std::string_view line);

// Strict whole-string parses; `what` names the field in error messages.
int parse_int(std::string_view s, std::string_view what);
long long parse_i64(std::string_view s, std::string_view what);
std::uint64_t parse_u64(std::string_view s, std::string_view what);
double parse_double(std::string_view s, std::string_view what);
Rgb parse_rgb(std::string_view s, std::string_view what);

// Fixed-point with exactly six decimals, locale independent.
std::string fixed6(double v);
std::string rgb_text(Rgb c);
std::string bbox_text(const BBox& b);

std::string read_text(const std::filesystem::path& path);
// Writes atomically enough for our purposes: full overwrite, throws IoError.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace crackbench::textio
