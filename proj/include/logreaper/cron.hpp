#pragma once

#include <bitset>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace logreaper {

using SysSeconds = std::chrono::sys_seconds;

// Five-field cron schedule as membership sets. The sets alone determine
// next_fire; the two flags record whether the day fields were written as
// '*' (needed for the standard dom/dow rule).
struct CronSchedule {
    std::bitset<60> minutes;
    std::bitset<24> hours;
    std::bitset<32> days_of_month;  // bits 1..31 used
    std::bitset<13> months;         // bits 1..12 used
    std::bitset<7> days_of_week;    // 0 = Sunday
    bool dom_restricted = false;
    bool dow_restricted = false;

    bool operator==(const CronSchedule&) const = default;
};

enum class CronErrorKind : uint8_t {
    FieldCount,    // not exactly five fields
    OutOfRange,    // value outside the field's bounds
    ZeroStep,      // "/0"
    EmptyElement,  // empty list element, e.g. "1,,2"
    BadToken,      // anything else unparseable (garbage, reversed range)
};

struct CronError {
    CronErrorKind kind;
    std::string detail;
    std::string message() const;
};

std::variant<CronSchedule, CronError> parse_cron(std::string_view expr);

// True iff the minute containing tp satisfies the schedule. Day matching
// follows the standard rule: with both day fields restricted either may
// match; with one restricted, that one must.
bool cron_matches(const CronSchedule& s, SysSeconds tp);

// Smallest minute-aligned instant strictly greater than `after` that
// matches; nullopt when nothing matches within a five-year horizon
// (unsatisfiable schedules such as Feb 30).
std::optional<SysSeconds> next_fire(const CronSchedule& s, SysSeconds after);

}  // namespace logreaper
