#pragma once

// Small text helpers shared by the file formats.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spraycp::text {

/// Shortest-safe lossless form: 17 significant digits, "inf"/"-inf" for
/// infinities.
std::string format_double(double v);

/// format_double, or "NA" when missing.
std::string format_metric(std::optional<double> v);

/// Parses a full-string double (accepts "inf", "-inf"). nullopt on failure.
std::optional<double> parse_double(std::string_view s);

/// Parses a full-string signed integer. nullopt on failure.
std::optional<long long> parse_int(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

std::string_view trim(std::string_view s);

}  // namespace spraycp::text
