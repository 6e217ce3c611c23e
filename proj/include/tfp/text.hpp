#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tfp {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

std::string_view trim(std::string_view s) noexcept;
std::string to_upper(std::string_view s);

/// Plain decimal: optional sign, digits, optional fraction. No exponent,
/// no inf/nan, no surrounding garbage (surrounding whitespace is trimmed).
std::optional<double> parse_decimal(std::string_view s);
std::optional<std::int64_t> parse_integer(std::string_view s);

/// Shortest fixed-notation text that parses back to the same double.
std::string format_decimal(double v);

/// ISO-8601 UTC with millisecond precision: 2026-10-19T08:15:00.123Z
std::string format_timestamp(Timestamp t);
std::optional<Timestamp> parse_timestamp(std::string_view s);
Timestamp now_utc();

}  // namespace tfp
