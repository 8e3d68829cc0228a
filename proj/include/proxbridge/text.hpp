#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace proxbridge {

// Shortest decimal representation that round-trips the double. All CSV
// output goes through this so reruns are byte-identical.
std::string format_double(double v);

std::optional<double> parse_double(std::string_view s);
std::optional<long> parse_long(std::string_view s);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

}  // namespace proxbridge
