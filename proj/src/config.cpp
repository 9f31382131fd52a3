#include "logreaper/config.hpp"

#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "logreaper/bench.hpp"
#include "logreaper/compactor.hpp"
#include "logreaper/file_sink.hpp"
#include "logreaper/flood.hpp"
#include "logreaper/generator.hpp"
#include "logreaper/parser.hpp"
#include "logreaper/report.hpp"
#include "logreaper/sensor.hpp"

namespace logreaper {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GenerateArgs {
    uint32_t threads = 10;
    double rate = 20.0;
    double duration = 10.0;
    uint64_t seed = 0;
    uint32_t src_pool = 256;
    std::string target = "192.168.1.20:80";
    std::string out_path;
    bool json_out = false;
};

struct FloodArgs {
    std::string target;
    uint32_t threads = 4;
    double duration = 10.0;
    int64_t pause_us = 5000;
    bool json_out = false;
};

struct SenseArgs {
    double duration = 0;  // 0 = until the stop signal
    bool json_out = false;
};

struct CompactArgs {
    bool once = true;
    bool json_out = false;
};

struct RunArgs {
    bool dry_run = false;
    int max_failures = 5;
    bool json_out = false;
};

struct BenchArgs {
    std::string suite = "default";
    std::string out_dir = "bench-out";
    bool json_out = false;
};

struct ReportArgs {
    std::string metrics_path;
    std::string out_dir;
};

struct ExportArgs {
    std::string out_path = "-";
    std::string from, to, proto, event;
};

std::pair<std::string, uint16_t> parse_host_port(const std::string& s) {
    auto colon = s.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= s.size())
        throw UsageError("expected host:port, got '" + s + "'");
    int port = 0;
    try {
        port = std::stoi(s.substr(colon + 1));
    } catch (...) {
        throw UsageError("bad port in '" + s + "'");
    }
    if (port < 0 || port > 65535)
        throw UsageError("port out of range in '" + s + "'");
    return {s.substr(0, colon), uint16_t(port)};
}

RotationMode rotation_mode(const Config& cfg) {
    if (cfg.mode == "truncate")
        return RotationMode::truncate_in_place();
    if (cfg.mode == "rotate")
        return RotationMode::rotate_archive(cfg.archive_dir.empty() ? fs::path(cfg.log_path + ".archive")
                                                                    : fs::path(cfg.archive_dir));
    throw UsageError("mode must be 'truncate' or 'rotate', got '" + cfg.mode + "'");
}

CompactorOptions compactor_options(const Config& cfg) {
    CompactorOptions opt;
    opt.fsync = cfg.fsync;
    if (!cfg.checkpoint_path.empty())
        opt.checkpoint_path = cfg.checkpoint_path;
    return opt;
}

void require(bool ok, const char* msg) {
    if (!ok)
        throw UsageError(msg);
}

std::vector<uint16_t> to_ports(const std::vector<int>& in) {
    std::vector<uint16_t> out;
    for (int p : in)
        out.push_back(uint16_t(p));
    return out;
}

json stats_json(const CompactionStats& s) {
    return json{{"bytes_consumed", s.bytes_consumed},
                {"records_parsed", s.records_parsed},
                {"parse_errors", s.parse_errors},
                {"records_committed", s.records_committed},
                {"bytes_truncated", s.bytes_truncated},
                {"batches_committed", s.batches_committed},
                {"duration_s", s.duration_s},
                {"external_rotation", s.external_rotation},
                {"note", s.note}};
}

json metrics_json(const CaseMetrics& m) {
    return json{{"peak_log_bytes", m.peak_log_bytes},
                {"total_emitted_bytes", m.total_emitted_bytes},
                {"lines_emitted", m.lines_emitted},
                {"sink_record_count", m.sink_record_count},
                {"parse_errors", m.parse_errors},
                {"disk_pct_peak", m.disk_pct_peak},
                {"quota_overflow", m.quota_overflow},
                {"ingest_wall_s", m.ingest_wall_s},
                {"transfer_s", m.representative_transfer_s()}};
}

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
    FloodProfile profile;
    profile.threads = a.threads;
    profile.lines_per_thread_per_sec = a.rate;
    profile.duration_s = a.duration;
    profile.seed = a.seed;
    profile.src_pool_size = a.src_pool;
    auto [host, port] = parse_host_port(a.target);
    auto addr = Ipv4::from_string(host);
    if (!addr)
        throw UsageError("target must be an IPv4 address, got '" + host + "'");
    profile.target_addr = *addr;
    profile.target_port = port;
    try {
        profile.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    GeneratorReport rep;
    if (a.out_path == "-") {
        rep = generate_log(profile, out);
    } else {
        std::ofstream file(a.out_path, std::ios::binary | std::ios::trunc);
        if (!file)
            throw std::runtime_error("cannot open output file " + a.out_path);
        rep = generate_log(profile, file);
        if (!file)
            throw std::runtime_error("write failed on " + a.out_path);
    }
    if (a.json_out)
        out << json{{"lines_emitted", rep.lines_emitted},
                    {"bytes_emitted", rep.bytes_emitted},
                    {"wall_s", rep.wall_s}}
                   .dump()
            << '\n';
    else
        err << "generated " << rep.lines_emitted << " lines, " << rep.bytes_emitted
            << " bytes in " << rep.wall_s << " s\n";
    return 0;
}

int cmd_sense(const Config& cfg, const SenseArgs& a, std::ostream& out, std::ostream& err,
              std::stop_token stop) {
    require(!cfg.log_path.empty(), "sense requires --log");
    SensorConfig scfg;
    scfg.tcp_ports = to_ports(cfg.tcp_ports);
    scfg.udp_ports = to_ports(cfg.udp_ports);
    scfg.bind_addr = cfg.bind_addr;
    scfg.log_path = cfg.log_path;
    scfg.max_conn_lifetime_s = cfg.conn_lifetime_s;
    scfg.fsync = cfg.fsync;
    try {
        scfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    Sensor sensor(scfg);
    sensor.start();
    err << "listening: tcp [";
    for (auto p : sensor.bound_tcp_ports())
        err << ' ' << p;
    err << " ], udp [";
    for (auto p : sensor.bound_udp_ports())
        err << ' ' << p;
    err << " ], logging to " << cfg.log_path << '\n';

    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration<double>(a.duration > 0 ? a.duration : 1e18);
    while (!stop.stop_requested() && std::chrono::steady_clock::now() < deadline)
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    sensor.stop();

    SensorCounters c = sensor.counters();
    if (a.json_out)
        out << json{{"accepted", c.accepted},
                    {"completed", c.completed},
                    {"udp_datagrams", c.udp_datagrams},
                    {"lines_logged", sensor.lines_logged()}}
                   .dump()
            << '\n';
    else
        out << "accepted " << c.accepted << ", completed " << c.completed << ", udp "
            << c.udp_datagrams << ", lines " << sensor.lines_logged() << '\n';
    return 0;
}

int cmd_flood(const FloodArgs& a, std::ostream& out, std::ostream&) {
    auto [host, port] = parse_host_port(a.target);
    FloodResult res;
    try {
        res = flood(host, port, a.threads, a.duration, std::chrono::microseconds(a.pause_us));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (a.json_out)
        out << json{{"attempted", res.attempted},
                    {"completed", res.completed},
                    {"refused", res.refused}}
                   .dump()
            << '\n';
    else
        out << "attempted " << res.attempted << ", completed " << res.completed << ", refused "
            << res.refused << '\n';
    return 0;
}

int cmd_compact(const Config& cfg, const CompactArgs& a, std::ostream& out, std::ostream& err) {
    require(!cfg.log_path.empty(), "compact requires --log");
    require(!cfg.sink_dir.empty(), "compact requires --sink");
    FileSink sink(cfg.sink_dir, FileSinkOptions{cfg.fsync});
    Compactor compactor(cfg.log_path, sink, rotation_mode(cfg), compactor_options(cfg));
    compactor.recover();
    CompactionStats stats = compactor.run_once();
    if (a.json_out) {
        out << stats_json(stats).dump() << '\n';
    } else {
        out << "consumed " << stats.bytes_consumed << " bytes, committed "
            << stats.records_committed << " records (" << stats.parse_errors
            << " parse errors), truncated " << stats.bytes_truncated << " bytes in "
            << stats.duration_s << " s\n";
        if (!stats.note.empty())
            err << "note: " << stats.note << '\n';
    }
    return 0;
}

int cmd_run(const Config& cfg, const RunArgs& a, std::ostream& out, std::ostream& err,
            std::stop_token stop) {
    require(!cfg.log_path.empty(), "run requires --log");
    require(!cfg.sink_dir.empty(), "run requires --sink");
    AnySchedule schedule = cfg.schedule();
    RotationMode mode = rotation_mode(cfg);

    if (a.dry_run) {
        out << "config ok\n";
        out << "log = " << cfg.log_path << '\n';
        out << "sink = " << cfg.sink_dir << '\n';
        if (!cfg.cron_expr.empty())
            out << "cron = " << cfg.cron_expr << '\n';
        else
            out << "every = " << cfg.every_seconds << "s\n";
        out << "mode = " << cfg.mode << '\n';
        out << "fsync = " << (cfg.fsync ? "on" : "off") << '\n';
        return 0;
    }

    FileSink sink(cfg.sink_dir, FileSinkOptions{cfg.fsync});
    CompactionDaemon::Config dcfg;
    dcfg.log = cfg.log_path;
    dcfg.schedule = schedule;
    dcfg.mode = mode;
    dcfg.compactor = compactor_options(cfg);
    dcfg.max_consecutive_failures = a.max_failures;
    CompactionDaemon daemon(dcfg, sink);
    daemon.start();
    err << "compaction daemon running on " << cfg.log_path << '\n';

    size_t reported = 0;
    while (!stop.stop_requested() && !daemon.finished()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        if (cfg.verbosity > 0) {
            auto runs = daemon.runs();
            for (; reported < runs.size(); ++reported) {
                const auto& s = runs[reported];
                err << "run " << (reported + 1) << ": " << s.records_committed << " records, "
                    << s.bytes_truncated << " bytes truncated, " << s.duration_s << " s\n";
            }
        }
    }
    daemon.request_stop();
    int code = daemon.join();

    auto runs = daemon.runs();
    uint64_t records = 0;
    for (const auto& s : runs)
        records += s.records_committed;
    if (a.json_out) {
        json per_run = json::array();
        for (const auto& s : runs)
            per_run.push_back(stats_json(s));
        out << json{{"runs", runs.size()},
                    {"records_committed", records},
                    {"skipped_fires", daemon.schedule_log().skipped()},
                    {"failed_fires", daemon.schedule_log().failed()},
                    {"per_run", per_run}}
                   .dump()
            << '\n';
    } else {
        out << runs.size() << " compaction runs, " << records << " records committed\n";
    }
    return code;
}

std::vector<CasePair> suite_from_file(const Config& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open suite file " + path);
    json spec;
    try {
        in >> spec;
    } catch (const json::exception& e) {
        throw UsageError(std::string("suite file: ") + e.what());
    }
    if (!spec.is_array() || spec.empty())
        throw UsageError("suite file must be a non-empty json array of cases");
    std::vector<CasePair> pairs;
    for (const auto& c : spec) {
        pairs.push_back(make_case_pair(
            c.value("label", std::to_string(pairs.size() + 1)), c.value("threads", 10u),
            c.value("rate", 20.0), c.value("duration", 80.0), c.value("interval", 10.0),
            cfg.quota_bytes, cfg.base_disk_pct, c.value("seed", uint64_t(pairs.size() + 1))));
    }
    return pairs;
}

int cmd_bench(const Config& cfg, const BenchArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<ComparisonRow> rows;
    if (a.suite == "paper-replay") {
        rows = paper_replay_rows();
    } else {
        std::vector<CasePair> pairs;
        if (a.suite == "default") {
            pairs = default_suite();
            for (auto& p : pairs) {
                p.baseline.disk_quota_bytes = p.compacted.disk_quota_bytes = cfg.quota_bytes;
                p.baseline.base_disk_pct = p.compacted.base_disk_pct = cfg.base_disk_pct;
            }
        } else if (a.suite.rfind("file:", 0) == 0) {
            pairs = suite_from_file(cfg, a.suite.substr(5));
        } else {
            throw UsageError("unknown suite '" + a.suite + "' (default|paper-replay|file:<spec>)");
        }
        rows = run_suite(pairs, fs::path(a.out_dir) / "work", &err);
    }

    write_report_files(rows, a.out_dir);
    if (a.json_out) {
        json jrows = json::array();
        for (const auto& r : rows)
            jrows.push_back(json{{"case", r.label},
                                 {"before", metrics_json(r.before)},
                                 {"after", metrics_json(r.after)},
                                 {"size_reduction_pct", r.size_reduction_pct},
                                 {"time_reduction_pct", r.time_reduction_pct}});
        out << jrows.dump() << '\n';
    } else {
        out << render_report_markdown(rows);
    }
    err << "report files written to " << a.out_dir << '\n';
    return 0;
}

int cmd_report(const ReportArgs& a, std::ostream&, std::ostream& err) {
    std::ifstream in(a.metrics_path);
    if (!in)
        throw UsageError("cannot open metrics file " + a.metrics_path);
    auto rows = parse_metrics_csv(in);
    write_report_files(rows, a.out_dir);
    err << "report files written to " << a.out_dir << '\n';
    return 0;
}

int cmd_export(const Config& cfg, const ExportArgs& a, std::ostream& out, std::ostream& err) {
    require(!cfg.sink_dir.empty(), "export requires --sink");
    if (!fs::exists(fs::path(cfg.sink_dir) / "MANIFEST"))
        throw UsageError("no sink at " + cfg.sink_dir);
    FileSink sink(cfg.sink_dir);

    RecordFilter filter;
    if (!a.from.empty()) {
        auto t = parse_timestamp(a.from);
        if (!t)
            throw UsageError("bad --from timestamp '" + a.from + "'");
        filter.from = *t;
    }
    if (!a.to.empty()) {
        auto t = parse_timestamp(a.to);
        if (!t)
            throw UsageError("bad --to timestamp '" + a.to + "'");
        filter.to = *t;
    }
    if (!a.proto.empty()) {
        if (a.proto == "tcp")
            filter.protocol = Protocol::Tcp;
        else if (a.proto == "udp")
            filter.protocol = Protocol::Udp;
        else if (a.proto == "icmp")
            filter.protocol = Protocol::Icmp;
        else
            throw UsageError("bad --proto '" + a.proto + "'");
    }
    if (!a.event.empty()) {
        if (a.event == "S" || a.event == "start")
            filter.event = EventKind::Start;
        else if (a.event == "E" || a.event == "end")
            filter.event = EventKind::End;
        else if (a.event == "-" || a.event == "packet")
            filter.event = EventKind::Packet;
        else
            throw UsageError("bad --event '" + a.event + "'");
    }

    uint64_t rows = 0;
    if (a.out_path == "-") {
        rows = sink.export_csv(out, filter);
    } else {
        std::ofstream file(a.out_path, std::ios::binary | std::ios::trunc);
        if (!file)
            throw std::runtime_error("cannot open output file " + a.out_path);
        rows = sink.export_csv(file, filter);
    }
    err << rows << " rows exported\n";
    return 0;
}

}  // namespace

AnySchedule Config::schedule() const {
    if (!cron_expr.empty() && every_seconds > 0)
        throw UsageError("--cron and --every are mutually exclusive");
    if (!cron_expr.empty()) {
        auto parsed = parse_cron(cron_expr);
        if (auto* e = std::get_if<CronError>(&parsed))
            throw UsageError("bad cron expression: " + e->message());
        return std::get<CronSchedule>(parsed);
    }
    if (every_seconds > 0)
        return EverySchedule{std::chrono::seconds(every_seconds)};
    throw UsageError("a schedule is required: --cron '<expr>' or --every <seconds>");
}

namespace {

// spec precedence: flag > environment > config file > default. CLI11 ranks
// env below config files, so env vars are materialized as leading args
// instead, unless the same flag was given explicitly.
std::vector<std::string> inject_env_args(const std::vector<std::string>& args) {
    static const struct {
        const char* flag;
        const char* env;
        bool boolean;
    } kEnvMap[] = {
        {"--log", "LOGREAPER_LOG", false},
        {"--sink", "LOGREAPER_SINK", false},
        {"--cron", "LOGREAPER_CRON", false},
        {"--every", "LOGREAPER_EVERY", false},
        {"--mode", "LOGREAPER_MODE", false},
        {"--archive-dir", "LOGREAPER_ARCHIVE_DIR", false},
        {"--checkpoint", "LOGREAPER_CHECKPOINT", false},
        {"--fsync", "LOGREAPER_FSYNC", true},
        {"--tcp-ports", "LOGREAPER_TCP_PORTS", false},
        {"--udp-ports", "LOGREAPER_UDP_PORTS", false},
        {"--bind", "LOGREAPER_BIND", false},
        {"--lifetime", "LOGREAPER_LIFETIME", false},
        {"--quota", "LOGREAPER_QUOTA", false},
        {"--base-pct", "LOGREAPER_BASE_PCT", false},
    };
    std::vector<std::string> merged;
    for (const auto& m : kEnvMap) {
        const char* v = std::getenv(m.env);
        if (!v || !*v)
            continue;
        bool given = false;
        for (const auto& a : args)
            if (a == m.flag || a.rfind(std::string(m.flag) + "=", 0) == 0)
                given = true;
        if (given)
            continue;
        if (m.boolean) {
            std::string val(v);
            if (val == "1" || val == "true" || val == "on" || val == "yes")
                merged.push_back(m.flag);
        } else {
            merged.push_back(std::string(m.flag) + "=" + v);
        }
    }
    merged.insert(merged.end(), args.begin(), args.end());
    return merged;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            std::stop_token stop) {
    CLI::App app{"honeypot log compaction toolkit"};
    app.name("logreaper");

    Config cfg;
    app.set_config("--config", "", "config file with 'key = value' lines");
    app.allow_config_extras(CLI::config_extras_mode::error);

    app.add_option("--log", cfg.log_path, "active honeypot log file [env: LOGREAPER_LOG]");
    app.add_option("--sink", cfg.sink_dir, "sink (record store) directory [env: LOGREAPER_SINK]");
    auto* cron_opt =
        app.add_option("--cron", cfg.cron_expr, "five-field cron schedule [env: LOGREAPER_CRON]");
    app.add_option("--every", cfg.every_seconds,
                   "fixed compaction interval, seconds [env: LOGREAPER_EVERY]")
        ->check(CLI::Range(int64_t(1), int64_t(86400) * 366))
        ->excludes(cron_opt);
    app.add_option("--mode", cfg.mode, "rotation mode: truncate | rotate [env: LOGREAPER_MODE]")
        ->check(CLI::IsMember({"truncate", "rotate"}));
    app.add_option("--archive-dir", cfg.archive_dir,
                   "archive directory for rotate mode [env: LOGREAPER_ARCHIVE_DIR]");
    app.add_option("--checkpoint", cfg.checkpoint_path,
                   "checkpoint file path [env: LOGREAPER_CHECKPOINT]");
    app.add_flag("--fsync", cfg.fsync,
                 "fsync sink and checkpoint writes for power-loss durability "
                 "[env: LOGREAPER_FSYNC]");
    app.add_option("--tcp-ports", cfg.tcp_ports,
                   "sensor tcp ports, comma separated; 0=ephemeral [env: LOGREAPER_TCP_PORTS]")
        ->delimiter(',')
        ->check(CLI::Range(0, 65535));
    app.add_option("--udp-ports", cfg.udp_ports,
                   "sensor udp ports, comma separated [env: LOGREAPER_UDP_PORTS]")
        ->delimiter(',')
        ->check(CLI::Range(0, 65535));
    app.add_option("--bind", cfg.bind_addr, "sensor bind address [env: LOGREAPER_BIND]");
    app.add_option("--lifetime", cfg.conn_lifetime_s,
                   "max accepted connection lifetime, seconds [env: LOGREAPER_LIFETIME]")
        ->check(CLI::PositiveNumber);
    app.add_option("--quota", cfg.quota_bytes,
                   "modeled disk quota, bytes (bench) [env: LOGREAPER_QUOTA]")
        ->check(CLI::PositiveNumber);
    app.add_option("--base-pct", cfg.base_disk_pct,
                   "modeled pre-existing disk usage %% (bench) [env: LOGREAPER_BASE_PCT]")
        ->check(CLI::Range(0.0, 100.0));
    app.add_flag("-v,--verbose", cfg.verbosity, "more diagnostics on stderr");

    app.require_subcommand(0, 1);

    GenerateArgs gen;
    auto* sub_gen = app.add_subcommand("generate", "write a synthetic flood log");
    sub_gen->add_option("--threads", gen.threads, "worker thread count")
        ->check(CLI::PositiveNumber);
    sub_gen->add_option("--rate", gen.rate, "lines per thread per second");
    sub_gen->add_option("--duration", gen.duration, "simulated duration, seconds");
    sub_gen->add_option("--seed", gen.seed, "deterministic seed");
    sub_gen->add_option("--src-pool", gen.src_pool, "distinct spoofed source addresses");
    sub_gen->add_option("--target", gen.target, "flood target as ip:port");
    sub_gen->add_option("--out", gen.out_path, "output file ('-' for stdout)")->required();
    sub_gen->add_flag("--json", gen.json_out, "machine-readable report");

    SenseArgs sense;
    auto* sub_sense = app.add_subcommand("sense", "run the capture sensor");
    sub_sense->add_option("--duration", sense.duration, "stop after this many seconds (0=signal)");
    sub_sense->add_flag("--json", sense.json_out, "machine-readable counters");

    FloodArgs fl;
    auto* sub_flood = app.add_subcommand("flood", "tcp connect/close flood");
    sub_flood->add_option("--target", fl.target, "target as host:port")->required();
    sub_flood->add_option("--threads", fl.threads, "concurrent workers");
    sub_flood->add_option("--duration", fl.duration, "flood duration, seconds");
    sub_flood->add_option("--pause-us", fl.pause_us, "per-connection pause, microseconds");
    sub_flood->add_flag("--json", fl.json_out, "machine-readable result");

    CompactArgs comp;
    auto* sub_compact = app.add_subcommand("compact", "one compaction pass");
    sub_compact->add_flag("--once", comp.once, "single pass (the default and only behavior)");
    sub_compact->add_flag("--json", comp.json_out, "machine-readable stats");

    RunArgs run;
    auto* sub_run = app.add_subcommand("run", "compaction daemon (capture -> parse -> truncate)");
    sub_run->add_flag("--dry-run", run.dry_run, "validate configuration and exit");
    sub_run->add_option("--max-failures", run.max_failures,
                        "exit after this many consecutive failing runs")
        ->check(CLI::PositiveNumber);
    sub_run->add_flag("--json", run.json_out, "machine-readable summary on exit");

    BenchArgs bench;
    auto* sub_bench = app.add_subcommand("bench", "run a comparison suite and write reports");
    sub_bench->add_option("--suite", bench.suite, "default | paper-replay | file:<spec.json>");
    sub_bench->add_option("--out", bench.out_dir, "report output directory");
    sub_bench->add_flag("--json", bench.json_out, "machine-readable rows");

    ReportArgs rep;
    auto* sub_report = app.add_subcommand("report", "re-render report files from metrics.csv");
    sub_report->add_option("--metrics", rep.metrics_path, "metrics.csv produced by bench")
        ->required();
    sub_report->add_option("--out", rep.out_dir, "report output directory")->required();

    ExportArgs exp;
    auto* sub_export = app.add_subcommand("export", "export sink records as csv");
    sub_export->add_option("--out", exp.out_path, "output file ('-' for stdout)");
    sub_export->add_option("--from", exp.from, "inclusive lower bound timestamp");
    sub_export->add_option("--to", exp.to, "exclusive upper bound timestamp");
    sub_export->add_option("--proto", exp.proto, "tcp | udp | icmp");
    sub_export->add_option("--event", exp.event, "S | E | packet");

    for (auto* sub : app.get_subcommands({}))
        sub->fallthrough();

    std::vector<std::string> argv = inject_env_args(args);
    argv.insert(argv.begin(), "logreaper");
    std::vector<const char*> cargv;
    for (const auto& a : argv)
        cargv.push_back(a.c_str());

    try {
        app.parse(int(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << '\n';
        err << "run 'logreaper --help' for usage\n";
        return 2;
    }

    try {
        if (sub_gen->parsed())
            return cmd_generate(gen, out, err);
        if (sub_sense->parsed())
            return cmd_sense(cfg, sense, out, err, stop);
        if (sub_flood->parsed())
            return cmd_flood(fl, out, err);
        if (sub_compact->parsed())
            return cmd_compact(cfg, comp, out, err);
        if (sub_run->parsed())
            return cmd_run(cfg, run, out, err, stop);
        if (sub_bench->parsed())
            return cmd_bench(cfg, bench, out, err);
        if (sub_report->parsed())
            return cmd_report(rep, out, err);
        if (sub_export->parsed())
            return cmd_export(cfg, exp, out, err);
        out << app.help();
        return 2;  // no subcommand given
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace logreaper
