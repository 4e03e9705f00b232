#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace elicit::text {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

/// Fixed-point rendering for human-readable tables.
std::string format_fixed(double value, int decimals);

double parse_double(std::string_view field);
std::uint64_t parse_uint(std::string_view field);

/// Splits one CSV line on commas. No quoting; none of our schemas need it.
std::vector<std::string_view> split_csv(std::string_view line);

std::string join_csv(const std::vector<std::string>& fields);

}  // namespace elicit::text
