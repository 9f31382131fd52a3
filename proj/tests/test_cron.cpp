#include "doctest.h"

#include <random>

#include "cron_oracle.hpp"
#include "logreaper/cron.hpp"
#include "support.hpp"

using namespace logreaper;
using namespace std::chrono;
using testsup::Rng;

namespace {

CronSchedule expect_schedule(const std::string& expr) {
    auto r = parse_cron(expr);
    if (auto* e = std::get_if<CronError>(&r))
        FAIL(expr << ": " << e->message());
    return std::get<CronSchedule>(r);
}

CronErrorKind expect_cron_error(const std::string& expr) {
    auto r = parse_cron(expr);
    REQUIRE(std::holds_alternative<CronError>(r));
    return std::get<CronError>(r).kind;
}

SysSeconds at(int y, unsigned mo, unsigned d, int hh, int mi, int ss = 0) {
    return sys_days(year(y) / mo / d) + hours(hh) + minutes(mi) + seconds(ss);
}

}  // namespace

TEST_CASE("parse the hourly expression") {
    CronSchedule s = expect_schedule("0 * * * *");
    CHECK(s.minutes.count() == 1);
    CHECK(s.minutes.test(0));
    CHECK(s.hours.count() == 24);
    CHECK(s.days_of_month.count() == 31);
    CHECK(s.months.count() == 12);
    CHECK(s.days_of_week.count() == 7);
    CHECK_FALSE(s.dom_restricted);
    CHECK_FALSE(s.dow_restricted);
}

TEST_CASE("parse steps, ranges and day restriction flags") {
    CronSchedule s = expect_schedule("*/15 2 * * 1");
    CHECK(s.minutes.count() == 4);
    CHECK(s.minutes.test(0));
    CHECK(s.minutes.test(15));
    CHECK(s.minutes.test(30));
    CHECK(s.minutes.test(45));
    CHECK(s.hours.count() == 1);
    CHECK(s.hours.test(2));
    CHECK_FALSE(s.dom_restricted);
    CHECK(s.dow_restricted);
    CHECK(s.days_of_week.count() == 1);
    CHECK(s.days_of_week.test(1));

    CronSchedule r = expect_schedule("5-10 * 1,15 2-4/2 *");
    CHECK(r.minutes.count() == 6);
    CHECK(r.days_of_month.count() == 2);
    CHECK(r.dom_restricted);
    CHECK(r.months.test(2));
    CHECK(r.months.test(4));
    CHECK_FALSE(r.months.test(3));
}

TEST_CASE("cron parse errors are typed") {
    CHECK(expect_cron_error("* * * *") == CronErrorKind::FieldCount);
    CHECK(expect_cron_error("* * * * * *") == CronErrorKind::FieldCount);
    CHECK(expect_cron_error("61 * * * *") == CronErrorKind::OutOfRange);
    CHECK(expect_cron_error("* 24 * * *") == CronErrorKind::OutOfRange);
    CHECK(expect_cron_error("* * 0 * *") == CronErrorKind::OutOfRange);
    CHECK(expect_cron_error("* * * 13 *") == CronErrorKind::OutOfRange);
    CHECK(expect_cron_error("* * * * 7") == CronErrorKind::OutOfRange);
    CHECK(expect_cron_error("*/0 * * * *") == CronErrorKind::ZeroStep);
    CHECK(expect_cron_error("1-5/0 * * * *") == CronErrorKind::ZeroStep);
    CHECK(expect_cron_error("1,,2 * * * *") == CronErrorKind::EmptyElement);
    CHECK(expect_cron_error("1,2, * * * *") == CronErrorKind::EmptyElement);
    CHECK(expect_cron_error("x * * * *") == CronErrorKind::BadToken);
    CHECK(expect_cron_error("10-5 * * * *") == CronErrorKind::BadToken);
    CHECK(expect_cron_error("5/2 * * * *") == CronErrorKind::BadToken);
}

TEST_CASE("next_fire fixed examples") {
    CronSchedule hourly = expect_schedule("0 * * * *");
    CHECK(next_fire(hourly, at(2021, 3, 1, 10, 15)) == at(2021, 3, 1, 11, 0));

    CronSchedule every_minute = expect_schedule("* * * * *");
    CHECK(next_fire(every_minute, at(2021, 3, 1, 10, 15, 30)) == at(2021, 3, 1, 10, 16));

    // an instant already on a fire boundary must advance strictly
    CHECK(next_fire(hourly, at(2021, 3, 1, 11, 0)) == at(2021, 3, 1, 12, 0));
}

TEST_CASE("next_fire leap day, verified against the oracle") {
    CronSchedule s = expect_schedule("0 0 29 2 *");
    auto start = at(2021, 1, 1, 0, 0);
    auto got = next_fire(s, start);
    auto want = testsup::oracle_next_fire(s, start);
    REQUIRE(got.has_value());
    REQUIRE(want.has_value());
    CHECK(*got == *want);
    CHECK(*got == at(2024, 2, 29, 0, 0));
}

TEST_CASE("unsatisfiable schedule reports no match") {
    CronSchedule s = expect_schedule("0 0 30 2 *");  // Feb 30 never exists
    CHECK_FALSE(next_fire(s, at(2021, 1, 1, 0, 0)).has_value());
}

TEST_CASE("dom/dow standard rule") {
    // both restricted: fire on the 13th OR on Friday
    CronSchedule s = expect_schedule("0 0 13 * 5");
    auto t = next_fire(s, at(2021, 8, 9, 0, 0));  // Mon 2021-08-09
    REQUIRE(t.has_value());
    CHECK(*t == at(2021, 8, 13, 0, 0));  // Friday the 13th happens to be both
    auto t2 = next_fire(s, *t);
    REQUIRE(t2.has_value());
    CHECK(*t2 == at(2021, 8, 20, 0, 0));  // next Friday, dom not matching

    // only dow restricted
    CronSchedule wd = expect_schedule("0 0 * * 0");
    auto t3 = next_fire(wd, at(2021, 8, 9, 0, 0));
    REQUIRE(t3.has_value());
    CHECK(*t3 == at(2021, 8, 15, 0, 0));  // Sunday
}

TEST_CASE("next_fire agrees with the brute-force oracle") {
    Rng rng(2024);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        std::string expr = testsup::random_cron_expr(rng);
        CronSchedule s = expect_schedule(expr);
        for (int j = 0; j < 5; ++j) {
            int64_t sec = int64_t(testsup::pick(rng, 1'577'836'800ULL, 1'798'761'600ULL));
            SysSeconds start{seconds(sec)};
            auto got = next_fire(s, start);
            auto want = testsup::oracle_next_fire(s, start);
            REQUIRE(got.has_value() == want.has_value());
            if (got && *got != *want)
                FAIL("mismatch for '" << expr << "' from " << sec << ": got "
                                      << got->time_since_epoch().count() << " want "
                                      << want->time_since_epoch().count());
            ++checked;
        }
    }
    CHECK(checked == 1500);
}

TEST_CASE("next_fire chain is idempotent and satisfies the schedule") {
    Rng rng(77);
    for (int i = 0; i < 50; ++i) {
        CronSchedule s = expect_schedule(testsup::random_cron_expr(rng));
        SysSeconds t{seconds(int64_t(testsup::pick(rng, 1'600'000'000ULL, 1'700'000'000ULL)))};
        for (int hop = 0; hop < 4; ++hop) {
            auto n = next_fire(s, t);
            if (!n)
                break;
            CHECK(*n > t);
            CHECK(n->time_since_epoch().count() % 60 == 0);
            CHECK(cron_matches(s, *n));
            CHECK(next_fire(s, *n - minutes(1)) == *n);
            t = *n;
        }
    }
}
