#include "logreaper/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace logreaper {

namespace fs = std::filesystem;

std::string format_quantity(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    std::string s(buf);
    while (!s.empty() && s.back() == '0')
        s.pop_back();
    if (!s.empty() && s.back() == '.')
        s.pop_back();
    return s;
}

double bytes_to_mb(uint64_t bytes) {
    return double(bytes) / 1e6;
}

double seconds_to_minutes(double s) {
    return s / 60.0;
}

std::string render_report_markdown(const std::vector<ComparisonRow>& rows) {
    std::ostringstream out;
    out << "| Case | Size (MB) | Disk Space Used (%) | Time (minutes) | Cron-Job |\n";
    out << "|------|-----------|---------------------|----------------|----------|\n";
    for (const auto& r : rows) {
        out << "| " << r.label << " | " << format_quantity(bytes_to_mb(r.before.peak_log_bytes))
            << " | " << format_quantity(r.before.disk_pct_peak) << " | "
            << format_quantity(seconds_to_minutes(r.before.representative_transfer_s()))
            << " | x |\n";
        out << "|  | " << format_quantity(bytes_to_mb(r.after.peak_log_bytes)) << " | "
            << format_quantity(r.after.disk_pct_peak) << " | "
            << format_quantity(seconds_to_minutes(r.after.representative_transfer_s()))
            << " | √ |\n";
    }
    out << "\n";
    out << "| Case | Size reduction (%) | Time reduction (%) |\n";
    out << "|------|--------------------|--------------------|\n";
    for (const auto& r : rows)
        out << "| " << r.label << " | " << r.size_reduction_pct << " | " << r.time_reduction_pct
            << " |\n";
    return out.str();
}

namespace {

constexpr const char* kMetricsHeader =
    "case,before_size_bytes,after_size_bytes,before_disk_pct,after_disk_pct,"
    "before_time_s,after_time_s,before_lines,after_lines,before_records,after_records,"
    "size_reduction_pct,time_reduction_pct,overflow_before,overflow_after";

}  // namespace

std::string render_metrics_csv(const std::vector<ComparisonRow>& rows) {
    std::ostringstream out;
    out << kMetricsHeader << '\n';
    for (const auto& r : rows) {
        out << r.label << ',' << r.before.peak_log_bytes << ',' << r.after.peak_log_bytes << ','
            << format_quantity(r.before.disk_pct_peak) << ','
            << format_quantity(r.after.disk_pct_peak) << ','
            << format_quantity(r.before.representative_transfer_s()) << ','
            << format_quantity(r.after.representative_transfer_s()) << ','
            << r.before.lines_emitted << ',' << r.after.lines_emitted << ','
            << r.before.sink_record_count << ',' << r.after.sink_record_count << ','
            << r.size_reduction_pct << ',' << r.time_reduction_pct << ','
            << (r.before.quota_overflow ? 1 : 0) << ',' << (r.after.quota_overflow ? 1 : 0)
            << '\n';
    }
    return out.str();
}

std::vector<ComparisonRow> parse_metrics_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader)
        throw std::runtime_error("metrics csv: unrecognized header");
    std::vector<ComparisonRow> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::istringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ','))
            f.push_back(tok);
        if (f.size() != 15)
            throw std::runtime_error("metrics csv: bad row: " + line);
        ComparisonRow r;
        r.label = f[0];
        r.before.peak_log_bytes = std::stoull(f[1]);
        r.after.peak_log_bytes = std::stoull(f[2]);
        r.before.disk_pct_peak = std::stod(f[3]);
        r.after.disk_pct_peak = std::stod(f[4]);
        r.before.ingest_wall_s = std::stod(f[5]);
        r.after.ingest_wall_s = std::stod(f[6]);
        r.before.lines_emitted = std::stoull(f[7]);
        r.after.lines_emitted = std::stoull(f[8]);
        r.before.sink_record_count = std::stoull(f[9]);
        r.after.sink_record_count = std::stoull(f[10]);
        r.size_reduction_pct = std::stoi(f[11]);
        r.time_reduction_pct = std::stoi(f[12]);
        r.before.quota_overflow = f[13] == "1";
        r.after.quota_overflow = f[14] == "1";
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string render_bar_chart_svg(const std::string& title, const std::string& unit,
                                 const std::vector<ChartSeries>& series) {
    const int width = 640, height = 360;
    const int left = 60, right = 20, top = 48, bottom = 48;
    const int plot_w = width - left - right;
    const int plot_h = height - top - bottom;

    double max_v = 1e-9;
    for (const auto& s : series)
        max_v = std::max({max_v, s.before, s.after});

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "  <style>text{font-family:sans-serif;font-size:12px}.title{font-size:15px;"
           "font-weight:bold}.value{font-size:11px}</style>\n";
    out << "  <text class=\"title\" x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\">"
        << title << "</text>\n";
    out << "  <line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << width - right
        << "\" y2=\"" << top + plot_h << "\" stroke=\"#333\"/>\n";
    out << "  <line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << top + plot_h << "\" stroke=\"#333\"/>\n";
    out << "  <text x=\"16\" y=\"" << top + plot_h / 2
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << top + plot_h / 2 << ")\">"
        << unit << "</text>\n";

    if (!series.empty()) {
        const double group_w = double(plot_w) / double(series.size());
        const double bar_w = std::min(48.0, group_w / 3.0);
        for (size_t i = 0; i < series.size(); ++i) {
            const auto& s = series[i];
            double cx = left + group_w * (double(i) + 0.5);
            struct Bar {
                double v;
                const char* fill;
                double x;
            } bars[2] = {
                {s.before, "#888888", cx - bar_w - 2},
                {s.after, "#2e8b57", cx + 2},
            };
            for (const auto& b : bars) {
                double h = plot_h * (b.v / max_v);
                double y = top + plot_h - h;
                out << "  <rect x=\"" << b.x << "\" y=\"" << y << "\" width=\"" << bar_w
                    << "\" height=\"" << h << "\" fill=\"" << b.fill << "\"/>\n";
                out << "  <text class=\"value\" x=\"" << b.x + bar_w / 2 << "\" y=\"" << y - 4
                    << "\" text-anchor=\"middle\">" << format_quantity(b.v) << "</text>\n";
            }
            out << "  <text x=\"" << cx << "\" y=\"" << top + plot_h + 18
                << "\" text-anchor=\"middle\">Case " << s.case_label << "</text>\n";
        }
    }
    out << "  <rect x=\"" << width - 150 << "\" y=\"30\" width=\"12\" height=\"12\" "
           "fill=\"#888888\"/>\n";
    out << "  <text x=\"" << width - 134 << "\" y=\"40\">before</text>\n";
    out << "  <rect x=\"" << width - 80 << "\" y=\"30\" width=\"12\" height=\"12\" "
           "fill=\"#2e8b57\"/>\n";
    out << "  <text x=\"" << width - 64 << "\" y=\"40\">after</text>\n";
    out << "</svg>\n";
    return out.str();
}

void write_report_files(const std::vector<ComparisonRow>& rows, const fs::path& out_dir) {
    if (rows.empty())
        throw std::invalid_argument("report: need at least one row");
    fs::create_directories(out_dir);

    auto write = [&](const char* name, const std::string& content) {
        std::ofstream out(out_dir / name, std::ios::trunc | std::ios::binary);
        if (!out)
            throw std::runtime_error(std::string("report: cannot write ") + name);
        out << content;
    };

    write("report.md", render_report_markdown(rows));
    write("metrics.csv", render_metrics_csv(rows));

    std::vector<ChartSeries> size_s, disk_s, time_s;
    for (const auto& r : rows) {
        size_s.push_back({r.label, bytes_to_mb(r.before.peak_log_bytes),
                          bytes_to_mb(r.after.peak_log_bytes)});
        disk_s.push_back({r.label, r.before.disk_pct_peak, r.after.disk_pct_peak});
        time_s.push_back({r.label, seconds_to_minutes(r.before.representative_transfer_s()),
                          seconds_to_minutes(r.after.representative_transfer_s())});
    }
    write("size.svg", render_bar_chart_svg("Log size before/after compaction", "MB", size_s));
    write("disk.svg", render_bar_chart_svg("Disk space used", "%", disk_s));
    write("time.svg", render_bar_chart_svg("Transfer time", "minutes", time_s));
}

}  // namespace logreaper
