#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "logreaper/logfile.hpp"
#include "logreaper/record.hpp"

namespace logreaper {

struct SensorConfig {
    std::vector<uint16_t> tcp_ports{0};  // 0 binds an ephemeral port
    std::vector<uint16_t> udp_ports;
    std::string bind_addr = "127.0.0.1";
    std::filesystem::path log_path;
    double max_conn_lifetime_s = 30.0;
    bool fsync = false;
    unsigned worker_threads = 8;

    void validate() const;  // throws std::invalid_argument
};

struct SensorCounters {
    uint64_t accepted = 0;
    uint64_t completed = 0;
    uint64_t udp_datagrams = 0;
};

// Socket-listening capture daemon writing honeypot-format lines: an S line
// when a TCP connection is accepted, an E line (with byte counters) when
// it closes, and a '-' line per UDP datagram. All lines funnel through one
// LogWriter, so appends are single-write atomic and cooperate with the
// compactor's rotation protocol.
class Sensor {
public:
    explicit Sensor(SensorConfig cfg);
    ~Sensor();
    Sensor(const Sensor&) = delete;
    Sensor& operator=(const Sensor&) = delete;

    void start();  // binds everything first; throws on any bind failure
    void stop();   // closes listeners, drains in-flight connections

    std::vector<uint16_t> bound_tcp_ports() const;
    std::vector<uint16_t> bound_udp_ports() const;
    SensorCounters counters() const;
    uint64_t lines_logged() const;

private:
    struct Conn {
        int fd = -1;
        Ipv4 peer_addr{};
        uint16_t peer_port = 0;
        uint16_t local_port = 0;
    };

    void accept_loop(int listen_fd, uint16_t port);
    void udp_loop(int fd, uint16_t port);
    void conn_worker();
    void log_event(const LogRecord& rec);
    LogRecord make_record(const Conn& c, EventKind event) const;

    SensorConfig cfg_;
    std::unique_ptr<LogWriter> writer_;
    std::vector<int> tcp_fds_;
    std::vector<int> udp_fds_;
    std::vector<uint16_t> tcp_bound_;
    std::vector<uint16_t> udp_bound_;
    std::vector<std::thread> accept_threads_;  // joined before workers drain
    std::vector<std::thread> worker_threads_;

    std::mutex queue_mu_;
    std::condition_variable queue_cv_;
    std::deque<Conn> queue_;
    bool stopping_ = false;
    bool started_ = false;

    std::atomic<uint64_t> accepted_{0};
    std::atomic<uint64_t> completed_{0};
    std::atomic<uint64_t> udp_datagrams_{0};
};

}  // namespace logreaper
