#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lace::text {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view line, char delimiter);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// Shortest representation that round-trips exactly.
std::string format_double(double v);

}  // namespace lace::text
