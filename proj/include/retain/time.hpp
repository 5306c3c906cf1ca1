#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace retain {

using Instant = std::chrono::sys_time<std::chrono::milliseconds>;
using Minutes = std::chrono::duration<double, std::ratio<60>>;

// "2024-03-01T08:15:00.250Z"; milliseconds are always written.
std::string format_iso8601(Instant t);

// Accepts "YYYY-MM-DDTHH:MM:SS[.fff][Z|+HH:MM|-HH:MM]". Throws Error(parse).
Instant parse_iso8601(std::string_view text);

// (to - from) in fractional days; negative if `to` precedes `from`.
double fractional_days(Instant from, Instant to);

Instant add_minutes(Instant t, double minutes);
Instant add_days(Instant t, double days);

}  // namespace retain
