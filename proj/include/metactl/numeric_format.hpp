#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace metactl {

/// Shortest decimal text that parses back to exactly `value` ("0.3", "6").
std::string format_number(double value);

/// Fixed-point text with `decimals` digits, locale independent.
std::string format_fixed(double value, int decimals);

/// Parses the whole of `text` as a decimal number.
std::optional<double> parse_number(std::string_view text);

}  // namespace metactl
