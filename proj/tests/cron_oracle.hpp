#pragma once

// Brute-force next-fire oracle, independent of the implementation: walks
// forward one minute at a time and tests field membership using its own
// civil-calendar arithmetic (no <chrono> calendar types).

#include <cstdint>
#include <optional>

#include "logreaper/cron.hpp"

namespace testsup {

struct CivilMinute {
    int year, month, day, hour, minute;
    int weekday;  // 0 = Sunday
};

// Days-to-civil conversion (proleptic Gregorian), era-based algorithm.
inline void civil_from_days(int64_t z, int& y, int& m, int& d) {
    z += 719468;
    int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    unsigned doe = unsigned(z - era * 146097);
    unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    int64_t yy = int64_t(yoe) + era * 400;
    unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    unsigned mp = (5 * doy + 2) / 153;
    d = int(doy - (153 * mp + 2) / 5 + 1);
    m = int(mp < 10 ? mp + 3 : mp - 9);
    y = int(yy + (m <= 2));
}

inline CivilMinute civil_of_minute(int64_t minutes_since_epoch) {
    int64_t day = minutes_since_epoch / 1440;
    int64_t rem = minutes_since_epoch % 1440;
    if (rem < 0) {
        rem += 1440;
        day -= 1;
    }
    CivilMinute c{};
    civil_from_days(day, c.year, c.month, c.day);
    c.hour = int(rem / 60);
    c.minute = int(rem % 60);
    c.weekday = int(((day % 7) + 7 + 4) % 7);  // 1970-01-01 was a Thursday
    return c;
}

inline bool oracle_minute_matches(const logreaper::CronSchedule& s, int64_t minute_epoch) {
    CivilMinute c = civil_of_minute(minute_epoch);
    if (!s.minutes.test(unsigned(c.minute)) || !s.hours.test(unsigned(c.hour)) ||
        !s.months.test(unsigned(c.month)))
        return false;
    bool dom = s.days_of_month.test(unsigned(c.day));
    bool dow = s.days_of_week.test(unsigned(c.weekday));
    if (s.dom_restricted && s.dow_restricted)
        return dom || dow;
    if (s.dom_restricted)
        return dom;
    if (s.dow_restricted)
        return dow;
    return true;
}

// Linear scan, minute by minute, bounded by the same five-year horizon.
inline std::optional<logreaper::SysSeconds> oracle_next_fire(const logreaper::CronSchedule& s,
                                                             logreaper::SysSeconds after) {
    int64_t after_s = after.time_since_epoch().count();
    int64_t m = after_s >= 0 ? after_s / 60 : (after_s - 59) / 60;  // floor
    m += 1;
    const int64_t horizon = m + int64_t(366) * 5 * 1440;
    for (; m < horizon; ++m)
        if (oracle_minute_matches(s, m))
            return logreaper::SysSeconds(std::chrono::seconds(m * 60));
    return std::nullopt;
}

// Random valid expression exercising every token form.
template <class Rng>
std::string random_cron_expr(Rng& rng) {
    static const unsigned lo[5] = {0, 0, 1, 1, 0};
    static const unsigned hi[5] = {59, 23, 31, 12, 6};
    auto pick = [&rng](uint64_t a, uint64_t b) {
        return std::uniform_int_distribution<uint64_t>(a, b)(rng);
    };
    std::string expr;
    for (int f = 0; f < 5; ++f) {
        if (f)
            expr += ' ';
        switch (pick(0, 4)) {
            case 0: expr += '*'; break;
            case 1: expr += "*/" + std::to_string(pick(1, hi[f])); break;
            case 2: expr += std::to_string(pick(lo[f], hi[f])); break;
            case 3: {
                unsigned a = unsigned(pick(lo[f], hi[f]));
                unsigned b = unsigned(pick(a, hi[f]));
                expr += std::to_string(a) + "-" + std::to_string(b);
                if (pick(0, 1))
                    expr += "/" + std::to_string(pick(1, 5));
                break;
            }
            default: {
                size_t n = pick(1, 3);
                for (size_t i = 0; i < n; ++i) {
                    if (i)
                        expr += ',';
                    expr += std::to_string(pick(lo[f], hi[f]));
                }
                break;
            }
        }
    }
    return expr;
}

}  // namespace testsup
