#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "logreaper/generator.hpp"

namespace logreaper {

// One benchmark arm: a flood profile plus (optionally) a compaction
// interval. Disk usage is modeled against a configurable quota rather than
// the real filesystem so results do not depend on the machine's disk size.
struct CaseSpec {
    std::string label;
    FloodProfile flood;
    std::optional<double> compaction_interval_s;  // nullopt = baseline, no compaction
    uint64_t disk_quota_bytes = 1ull << 30;
    double base_disk_pct = 10.0;

    void validate() const;
};

struct CaseMetrics {
    uint64_t peak_log_bytes = 0;
    uint64_t total_emitted_bytes = 0;
    uint64_t lines_emitted = 0;
    uint64_t sink_record_count = 0;
    uint64_t parse_errors = 0;
    double disk_pct_peak = 0;  // base + 100*peak/quota, clamped to 100
    bool quota_overflow = false;
    double ingest_wall_s = 0;  // sum of compaction runs, or the baseline one-shot
    std::vector<double> run_durations_s;

    // The per-transfer time this arm pays: the one-shot for a baseline,
    // the largest single incremental run otherwise.
    double representative_transfer_s() const;
};

struct ComparisonRow {
    std::string label;
    CaseMetrics before;
    CaseMetrics after;
    int size_reduction_pct = 0;
    int time_reduction_pct = 0;
};

// Round-half-up integer percentage of (before-after)/before. Throws
// std::invalid_argument when before is not positive or after exceeds
// before (a negative reduction is flagged, never silently clamped).
int reduction(uint64_t before, uint64_t after);
int reduction(double before, double after);

struct CasePair {
    std::string label;
    CaseSpec baseline;
    CaseSpec compacted;  // same flood profile, compaction enabled
};

CaseMetrics run_case(const CaseSpec& spec, const std::filesystem::path& workdir);

// Runs each pair (baseline first) and computes the comparison. `progress`,
// when given, receives one line per finished arm.
std::vector<ComparisonRow> run_suite(const std::vector<CasePair>& pairs,
                                     const std::filesystem::path& workdir,
                                     std::ostream* progress = nullptr);

CasePair make_case_pair(std::string label, uint32_t threads, double rate_per_thread,
                        double duration_s, double interval_s, uint64_t quota_bytes,
                        double base_disk_pct, uint64_t seed);

// Three scaled profiles (10/50/90 worker threads), 80 s at a constant rate
// with a 10 s compaction interval: eight intervals, the desk-scale analog
// of eight hourly truncations over an eight-hour run.
std::vector<CasePair> default_suite();

// The published measurements fed through the same comparison arithmetic.
std::vector<ComparisonRow> paper_replay_rows();

}  // namespace logreaper
