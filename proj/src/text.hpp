#pragma once

// Small text helpers shared by the CSV/JSON/config readers. Not installed.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eegpref::text {

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

// Whole-field parse; nullopt on trailing garbage or overflow.
std::optional<double> parse_double(std::string_view s) noexcept;
std::optional<unsigned long long> parse_u64(std::string_view s) noexcept;

// Shortest round-trip decimal form (std::to_chars).
std::string format_double(double value);

std::string read_file(const std::string& path);

}  // namespace eegpref::text
