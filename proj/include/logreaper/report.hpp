#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "logreaper/bench.hpp"

namespace logreaper {

// Human-side rendering of comparison rows: a before/after table (two rows
// per case, x / √ in the Cron-Job column) followed by the per-case
// reduction percentages.
std::string render_report_markdown(const std::vector<ComparisonRow>& rows);

// Raw metrics, one CSV row per case (documented header, stable order).
std::string render_metrics_csv(const std::vector<ComparisonRow>& rows);
std::vector<ComparisonRow> parse_metrics_csv(std::istream& in);

// Self-contained SVG grouped bar chart; every bar carries its value as a
// <text class="value"> label.
struct ChartSeries {
    std::string case_label;
    double before = 0;
    double after = 0;
};
std::string render_bar_chart_svg(const std::string& title, const std::string& unit,
                                 const std::vector<ChartSeries>& series);

// Writes report.md, metrics.csv, size.svg, disk.svg and time.svg.
void write_report_files(const std::vector<ComparisonRow>& rows,
                        const std::filesystem::path& out_dir);

// Display formatting shared by the table, the charts and their tests:
// up to two decimals, trailing zeros trimmed ("85", "1.05", "0.5").
std::string format_quantity(double v);
double bytes_to_mb(uint64_t bytes);
double seconds_to_minutes(double s);

}  // namespace logreaper
