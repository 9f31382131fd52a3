#include "doctest.h"

#include <regex>
#include <sstream>

#include "logreaper/bench.hpp"
#include "logreaper/report.hpp"
#include "support.hpp"

using namespace logreaper;
using testsup::TempDir;

namespace {

std::vector<std::string> extract_value_labels(const std::string& svg) {
    std::vector<std::string> out;
    std::regex re("<text class=\"value\"[^>]*>([^<]*)</text>");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re);
         it != std::sregex_iterator(); ++it)
        out.push_back((*it)[1]);
    return out;
}

}  // namespace

TEST_CASE("reduction reproduces the published percentages exactly") {
    CHECK(reduction(uint64_t(85), uint64_t(11)) == 87);
    CHECK(reduction(uint64_t(35), uint64_t(4)) == 89);
    CHECK(reduction(uint64_t(446), uint64_t(56)) == 87);
    CHECK(reduction(uint64_t(190), uint64_t(23)) == 88);
    CHECK(reduction(uint64_t(844), uint64_t(118)) == 86);
    CHECK(reduction(uint64_t(320), uint64_t(40)) == 88);  // 87.5 rounds half-up
    CHECK(reduction(uint64_t(7), uint64_t(7)) == 0);
    CHECK(reduction(uint64_t(100), uint64_t(0)) == 100);
}

TEST_CASE("reduction flags invalid comparisons instead of hiding them") {
    CHECK_THROWS_AS(reduction(uint64_t(0), uint64_t(0)), std::invalid_argument);
    CHECK_THROWS_AS(reduction(uint64_t(10), uint64_t(11)), std::invalid_argument);
    CHECK_THROWS_AS(reduction(0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(reduction(1.0, 2.0), std::invalid_argument);
}

TEST_CASE("reduction is scale-invariant") {
    testsup::Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        uint64_t b = testsup::pick(rng, 1, 100000);
        uint64_t a = testsup::pick(rng, 0, b);
        int base = reduction(b, a);
        for (uint64_t k : {uint64_t(2), uint64_t(3), uint64_t(10), uint64_t(1000)})
            CHECK(reduction(k * b, k * a) == base);
        CHECK(reduction(double(b), double(a)) == base);
    }
}

TEST_CASE("paper replay rows carry the published reductions") {
    auto rows = paper_replay_rows();
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].size_reduction_pct == 87);
    CHECK(rows[0].time_reduction_pct == 89);
    CHECK(rows[1].size_reduction_pct == 87);
    CHECK(rows[1].time_reduction_pct == 88);
    CHECK(rows[2].size_reduction_pct == 86);
    CHECK(rows[2].time_reduction_pct == 88);
    CHECK(rows[2].before.quota_overflow);
}

TEST_CASE("report table is shaped like the published comparison") {
    auto rows = paper_replay_rows();
    std::string md = render_report_markdown(rows);
    CHECK(md.find("| Case | Size (MB) | Disk Space Used (%) | Time (minutes) | Cron-Job |") !=
          std::string::npos);
    for (const char* cell :
         {"| 85 |", "| 11 |", "| 446 |", "| 56 |", "| 844 |", "| 118 |", "| 95 |", "| 35 |",
          "| 4 |", "| 40 |", "| 1 | 87 | 89 |", "| 2 | 87 | 88 |", "| 3 | 86 | 88 |"})
        CHECK_MESSAGE(md.find(cell) != std::string::npos, "missing cell: " << cell);
    CHECK(md.find(" x |") != std::string::npos);
    CHECK(md.find("√") != std::string::npos);
}

TEST_CASE("metrics csv round-trips") {
    auto rows = paper_replay_rows();
    std::string csv = render_metrics_csv(rows);
    std::istringstream in(csv);
    auto parsed = parse_metrics_csv(in);
    REQUIRE(parsed.size() == rows.size());
    CHECK(render_metrics_csv(parsed) == csv);
    CHECK(parsed[0].before.peak_log_bytes == 85'000'000);
    CHECK(parsed[2].after.peak_log_bytes == 118'000'000);
}

TEST_CASE("chart value labels agree with the csv") {
    TempDir tmp;
    auto rows = paper_replay_rows();
    write_report_files(rows, tmp.path());

    auto size_labels = extract_value_labels(testsup::read_file(tmp / "size.svg"));
    auto disk_labels = extract_value_labels(testsup::read_file(tmp / "disk.svg"));
    auto time_labels = extract_value_labels(testsup::read_file(tmp / "time.svg"));
    REQUIRE(size_labels.size() == 6);
    REQUIRE(disk_labels.size() == 6);
    REQUIRE(time_labels.size() == 6);

    std::istringstream in(testsup::read_file(tmp / "metrics.csv"));
    auto parsed = parse_metrics_csv(in);
    for (size_t i = 0; i < parsed.size(); ++i) {
        CHECK(size_labels[2 * i] == format_quantity(bytes_to_mb(parsed[i].before.peak_log_bytes)));
        CHECK(size_labels[2 * i + 1] ==
              format_quantity(bytes_to_mb(parsed[i].after.peak_log_bytes)));
        CHECK(disk_labels[2 * i] == format_quantity(parsed[i].before.disk_pct_peak));
        CHECK(disk_labels[2 * i + 1] == format_quantity(parsed[i].after.disk_pct_peak));
        CHECK(time_labels[2 * i] ==
              format_quantity(seconds_to_minutes(parsed[i].before.representative_transfer_s())));
        CHECK(time_labels[2 * i + 1] ==
              format_quantity(seconds_to_minutes(parsed[i].after.representative_transfer_s())));
    }
    CHECK(size_labels[0] == "85");
    CHECK(time_labels[1] == "4");
}

TEST_CASE("equal before/after renders zero reductions") {
    ComparisonRow row;
    row.label = "1";
    row.before.peak_log_bytes = row.after.peak_log_bytes = 5'000'000;
    row.before.disk_pct_peak = row.after.disk_pct_peak = 12;
    row.before.ingest_wall_s = row.after.ingest_wall_s = 60;
    row.size_reduction_pct = reduction(row.before.peak_log_bytes, row.after.peak_log_bytes);
    row.time_reduction_pct = reduction(row.before.ingest_wall_s, row.after.ingest_wall_s);
    CHECK(row.size_reduction_pct == 0);
    std::string md = render_report_markdown({row});
    CHECK(md.find("| 1 | 0 | 0 |") != std::string::npos);
    std::string svg = render_bar_chart_svg("t", "MB", {{row.label, 5, 5}});
    auto labels = extract_value_labels(svg);
    REQUIRE(labels.size() == 2);
    CHECK(labels[0] == labels[1]);
}

TEST_CASE("case spec validation") {
    CasePair pair = make_case_pair("x", 2, 10, 4, 1, 1 << 20, 10, 1);
    pair.baseline.validate();
    pair.compacted.validate();

    CaseSpec bad = pair.compacted;
    bad.compaction_interval_s = 3.0;  // duration 4 < 2 intervals
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = pair.compacted;
    bad.compaction_interval_s = 0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = pair.compacted;
    bad.base_disk_pct = 120;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("baseline arm: peak equals total emitted, records conserved") {
    TempDir tmp;
    CasePair pair = make_case_pair("b", 4, 50, 2, 1, 1 << 30, 10, 7);
    CaseMetrics m = run_case(pair.baseline, tmp / "w");
    CHECK(m.peak_log_bytes == m.total_emitted_bytes);
    CHECK(m.lines_emitted == 400);
    CHECK(m.sink_record_count == 400);
    CHECK(m.parse_errors == 0);
    CHECK(m.ingest_wall_s > 0);
    CHECK(m.disk_pct_peak > 10.0);
}

TEST_CASE("compacted arm bounds the active log and conserves records") {
    TempDir tmp;
    // 6 one-second intervals at a constant ~1200 lines/s
    CasePair pair = make_case_pair("c", 4, 300, 6, 1, 1 << 30, 10, 8);
    CaseMetrics base = run_case(pair.baseline, tmp / "base");
    CaseMetrics comp = run_case(pair.compacted, tmp / "comp");

    CHECK(comp.lines_emitted == base.lines_emitted);
    CHECK(comp.sink_record_count == comp.lines_emitted);  // exactly-once conservation
    CHECK(comp.peak_log_bytes < base.peak_log_bytes);     // baseline dominance
    int red = reduction(base.peak_log_bytes, comp.peak_log_bytes);
    // expected ~= 100*(1-1/6) ~= 83; generous slack for sampling noise
    CHECK(red >= 60);
    CHECK(red <= 95);
    CHECK(comp.run_durations_s.size() >= 4);
}

TEST_CASE("size reduction grows with the interval count") {
    TempDir tmp;
    CasePair coarse = make_case_pair("n2", 4, 250, 6, 3, 1 << 30, 10, 9);
    CasePair fine = make_case_pair("n6", 4, 250, 6, 1, 1 << 30, 10, 9);
    CaseMetrics base = run_case(coarse.baseline, tmp / "base");
    CaseMetrics two = run_case(coarse.compacted, tmp / "two");
    CaseMetrics six = run_case(fine.compacted, tmp / "six");
    int red2 = reduction(base.peak_log_bytes, two.peak_log_bytes);
    int red6 = reduction(base.peak_log_bytes, six.peak_log_bytes);
    // N=2 expects ~50, N=6 expects ~83
    CHECK(red2 < red6);
    CHECK(red2 >= 30);
    CHECK(red6 >= 60);
}
