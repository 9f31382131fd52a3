#pragma once

#include <cstdint>
#include <iosfwd>
#include <stop_token>
#include <string>
#include <vector>

#include "logreaper/scheduler.hpp"

namespace logreaper {

// Effective settings shared across subcommands, merged from (highest
// precedence first) command-line flags, LOGREAPER_* environment variables,
// the --config file (key = value lines, # comments) and built-in defaults.
struct Config {
    std::string log_path;
    std::string sink_dir;
    std::string cron_expr;
    int64_t every_seconds = 0;  // 0 = not set
    std::string mode = "truncate";  // or "rotate"
    std::string archive_dir;
    std::string checkpoint_path;
    bool fsync = false;
    std::vector<int> tcp_ports{2222};
    std::vector<int> udp_ports;
    std::string bind_addr = "127.0.0.1";
    double conn_lifetime_s = 30.0;
    uint64_t quota_bytes = 1ull << 30;
    double base_disk_pct = 10.0;
    int verbosity = 0;

    // Throws UsageError when neither or an invalid schedule is configured.
    AnySchedule schedule() const;
};

// Configuration / usage problems exit with code 2; runtime failures with 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Full command-line entry point (argv without the program name). Writes
// results to `out`, diagnostics to `err`; the stop token ends long-running
// subcommands (daemon, sensor). Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            std::stop_token stop = {});

}  // namespace logreaper
