#include "logreaper/cron.hpp"

#include <charconv>
#include <vector>

namespace logreaper {

namespace {

using namespace std::chrono;

struct FieldSpec {
    const char* name;
    unsigned lo, hi;
};

constexpr FieldSpec kFields[5] = {
    {"minute", 0, 59}, {"hour", 0, 23}, {"day-of-month", 1, 31},
    {"month", 1, 12},  {"day-of-week", 0, 6},
};

std::optional<unsigned> parse_uint(std::string_view s) {
    if (s.empty())
        return std::nullopt;
    unsigned v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        return std::nullopt;
    return v;
}

template <size_t N>
std::optional<CronError> parse_field(std::string_view text, const FieldSpec& spec,
                                     std::bitset<N>& out, bool* restricted) {
    auto err = [&](CronErrorKind kind, std::string_view what) {
        return CronError{kind, std::string(spec.name) + " field: " + std::string(what)};
    };

    if (restricted)
        *restricted = (text != "*");

    if (text == "*") {
        for (unsigned v = spec.lo; v <= spec.hi; ++v)
            out.set(v);
        return std::nullopt;
    }

    // "*/n": every n-th value across the full range
    if (text.rfind("*/", 0) == 0) {
        auto step = parse_uint(text.substr(2));
        if (!step)
            return err(CronErrorKind::BadToken, text);
        if (*step == 0)
            return err(CronErrorKind::ZeroStep, text);
        for (unsigned v = spec.lo; v <= spec.hi; v += *step)
            out.set(v);
        return std::nullopt;
    }

    size_t pos = 0;
    while (pos <= text.size()) {
        size_t comma = text.find(',', pos);
        std::string_view elem = text.substr(pos, comma == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : comma - pos);
        pos = comma == std::string_view::npos ? text.size() + 1 : comma + 1;

        if (elem.empty())
            return err(CronErrorKind::EmptyElement, text);

        unsigned step = 1;
        if (size_t slash = elem.find('/'); slash != std::string_view::npos) {
            auto st = parse_uint(elem.substr(slash + 1));
            if (!st)
                return err(CronErrorKind::BadToken, elem);
            if (*st == 0)
                return err(CronErrorKind::ZeroStep, elem);
            step = *st;
            elem = elem.substr(0, slash);
            if (elem.find('-') == std::string_view::npos)
                return err(CronErrorKind::BadToken, elem);  // steps only on ranges
        }

        unsigned a, b;
        if (size_t dash = elem.find('-'); dash != std::string_view::npos) {
            auto lo = parse_uint(elem.substr(0, dash));
            auto hi = parse_uint(elem.substr(dash + 1));
            if (!lo || !hi)
                return err(CronErrorKind::BadToken, elem);
            if (*lo > *hi)
                return err(CronErrorKind::BadToken, elem);
            a = *lo;
            b = *hi;
        } else {
            auto v = parse_uint(elem);
            if (!v)
                return err(CronErrorKind::BadToken, elem);
            a = b = *v;
        }
        if (a < spec.lo || b > spec.hi)
            return err(CronErrorKind::OutOfRange, elem);
        for (unsigned v = a; v <= b; v += step)
            out.set(v);
    }
    return std::nullopt;
}

struct Fields {
    year_month_day ymd;
    unsigned hh, mm;
    unsigned wd;  // 0 = Sunday
};

Fields decompose(sys_seconds tp) {
    auto dp = floor<days>(tp);
    auto tod = tp - dp;
    Fields f;
    f.ymd = year_month_day(sys_days(dp));
    f.hh = unsigned(duration_cast<hours>(tod).count());
    f.mm = unsigned(duration_cast<minutes>(tod % hours(1)).count());
    f.wd = weekday(sys_days(dp)).c_encoding();
    return f;
}

bool day_matches(const CronSchedule& s, const Fields& f) {
    bool dom = s.days_of_month.test(unsigned(f.ymd.day()));
    bool dow = s.days_of_week.test(f.wd);
    if (s.dom_restricted && s.dow_restricted)
        return dom || dow;
    if (s.dom_restricted)
        return dom;
    if (s.dow_restricted)
        return dow;
    return true;
}

}  // namespace

std::string CronError::message() const {
    const char* what = "";
    switch (kind) {
        case CronErrorKind::FieldCount: what = "expected 5 fields"; break;
        case CronErrorKind::OutOfRange: what = "value out of range"; break;
        case CronErrorKind::ZeroStep: what = "step must be positive"; break;
        case CronErrorKind::EmptyElement: what = "empty list element"; break;
        case CronErrorKind::BadToken: what = "unrecognized token"; break;
    }
    return std::string(what) + " (" + detail + ")";
}

std::variant<CronSchedule, CronError> parse_cron(std::string_view expr) {
    std::vector<std::string_view> fields;
    size_t i = 0;
    while (i < expr.size()) {
        while (i < expr.size() && (expr[i] == ' ' || expr[i] == '\t'))
            ++i;
        size_t start = i;
        while (i < expr.size() && expr[i] != ' ' && expr[i] != '\t')
            ++i;
        if (i > start)
            fields.push_back(expr.substr(start, i - start));
    }
    if (fields.size() != 5)
        return CronError{CronErrorKind::FieldCount,
                         "got " + std::to_string(fields.size()) + " fields"};

    CronSchedule s;
    if (auto e = parse_field(fields[0], kFields[0], s.minutes, nullptr)) return *e;
    if (auto e = parse_field(fields[1], kFields[1], s.hours, nullptr)) return *e;
    if (auto e = parse_field(fields[2], kFields[2], s.days_of_month, &s.dom_restricted)) return *e;
    if (auto e = parse_field(fields[3], kFields[3], s.months, nullptr)) return *e;
    if (auto e = parse_field(fields[4], kFields[4], s.days_of_week, &s.dow_restricted)) return *e;
    return s;
}

bool cron_matches(const CronSchedule& s, SysSeconds tp) {
    Fields f = decompose(tp);
    return s.minutes.test(f.mm) && s.hours.test(f.hh) &&
           s.months.test(unsigned(f.ymd.month())) && day_matches(s, f);
}

std::optional<SysSeconds> next_fire(const CronSchedule& s, SysSeconds after) {
    auto t = floor<minutes>(after) + minutes(1);
    const auto horizon = t + days(366 * 5);  // five-year search bound

    while (t < horizon) {
        Fields f = decompose(t);
        if (!s.months.test(unsigned(f.ymd.month()))) {
            // jump to the first minute of the next month
            auto next = f.ymd.year() / f.ymd.month() / 1 + months(1);
            t = sys_days(year_month_day(next));
            continue;
        }
        if (!day_matches(s, f)) {
            t = floor<days>(t) + days(1);
            continue;
        }
        if (!s.hours.test(f.hh)) {
            t = floor<hours>(sys_seconds(t)) + hours(1);
            continue;
        }
        if (!s.minutes.test(f.mm)) {
            t += minutes(1);
            continue;
        }
        return sys_seconds(t);
    }
    return std::nullopt;
}

}  // namespace logreaper
