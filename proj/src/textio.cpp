#include "crackbench/textio.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "crackbench/error.hpp"

namespace crackbench::textio {

std::string_view trim(std::string_view s) noexcept {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw InvalidArgument("line " + std::to_string(line_no) + ": expected key=value");
        }
        out.emplace_back(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
    }
    return out;
}

namespace {

template <typename T>
T parse_integral(std::string_view s, std::string_view what) {
    s = trim(s);
    T v{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty()) {
        throw InvalidArgument("invalid integer for " + std::string(what) + ": '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

int parse_int(std::string_view s, std::string_view what) { return parse_integral<int>(s, what); }
long long parse_i64(std::string_view s, std::string_view what) { return parse_integral<long long>(s, what); }
std::uint64_t parse_u64(std::string_view s, std::string_view what) {
    return parse_integral<std::uint64_t>(s, what);
}

double parse_double(std::string_view s, std::string_view what) {
    s = trim(s);
    double v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty() || !std::isfinite(v)) {
        throw InvalidArgument("invalid number for " + std::string(what) + ": '" + std::string(s) + "'");
    }
    return v;
}

Rgb parse_rgb(std::string_view s, std::string_view what) {
    int c[3];
    for (int i = 0; i < 3; ++i) {
        const auto comma = s.find(',');
        if ((i < 2) == (comma == std::string_view::npos)) {
            throw InvalidArgument("invalid color for " + std::string(what) + ": expected r,g,b");
        }
        c[i] = parse_int(s.substr(0, comma), what);
        if (c[i] < 0 || c[i] > 255) {
            throw InvalidArgument("color channel out of range for " + std::string(what));
        }
        if (comma != std::string_view::npos) s = s.substr(comma + 1);
    }
    return {static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]), static_cast<std::uint8_t>(c[2])};
}

std::string fixed6(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
    if (ec != std::errc{}) return "nan";
    std::string out(buf, ptr);
    if (out == "-0.000000") out = "0.000000";
    return out;
}

std::string rgb_text(Rgb c) {
    return std::to_string(c.r) + "," + std::to_string(c.g) + "," + std::to_string(c.b);
}

std::string bbox_text(const BBox& b) {
    return std::to_string(b.x_min) + "," + std::to_string(b.y_min) + "," + std::to_string(b.x_max) +
           "," + std::to_string(b.y_max);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "io-failure: cannot open for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "io-failure: cannot open for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError(path, "io-failure: write failed");
}

}  // namespace crackbench::textio
