#include "logreaper/sensor.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <set>
#include <stdexcept>
#include <system_error>

#include "logreaper/parser.hpp"

namespace logreaper {

using namespace std::chrono;

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
    throw std::system_error(errno, std::generic_category(), what);
}

Instant now_on_grid() {
    auto us = duration_cast<microseconds>(system_clock::now().time_since_epoch());
    return Instant(microseconds(us.count() - us.count() % 100));
}

void set_recv_timeout(int fd, int ms) {
    timeval tv{};
    tv.tv_sec = ms / 1000;
    tv.tv_usec = (ms % 1000) * 1000;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
}

sockaddr_in make_addr(const std::string& ip, uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, ip.c_str(), &addr.sin_addr) != 1)
        throw std::invalid_argument("bad bind address: " + ip);
    return addr;
}

uint16_t bound_port(int fd) {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
        throw_errno("getsockname");
    return ntohs(addr.sin_port);
}

void check_no_duplicates(const std::vector<uint16_t>& ports, const char* what) {
    std::set<uint16_t> seen;
    for (uint16_t p : ports)
        if (p != 0 && !seen.insert(p).second)
            throw std::invalid_argument(std::string("duplicate ") + what + " port " +
                                        std::to_string(p));
}

}  // namespace

void SensorConfig::validate() const {
    if (tcp_ports.empty() && udp_ports.empty())
        throw std::invalid_argument("sensor: no ports to listen on");
    check_no_duplicates(tcp_ports, "tcp");
    check_no_duplicates(udp_ports, "udp");
    if (log_path.empty())
        throw std::invalid_argument("sensor: log path required");
    if (!(max_conn_lifetime_s > 0))
        throw std::invalid_argument("sensor: connection lifetime must be positive");
    if (worker_threads == 0)
        throw std::invalid_argument("sensor: need at least one worker");
}

Sensor::Sensor(SensorConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
}

Sensor::~Sensor() {
    stop();
}

void Sensor::start() {
    if (started_)
        throw std::logic_error("sensor already started");

    writer_ = std::make_unique<LogWriter>(cfg_.log_path, cfg_.fsync);

    auto cleanup_and_throw = [this](const std::string& what) {
        int saved = errno;
        for (int fd : tcp_fds_)
            ::close(fd);
        for (int fd : udp_fds_)
            ::close(fd);
        tcp_fds_.clear();
        udp_fds_.clear();
        errno = saved;
        throw_errno(what);
    };

    for (uint16_t port : cfg_.tcp_ports) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0)
            cleanup_and_throw("socket");
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        auto addr = make_addr(cfg_.bind_addr, port);
        if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
            ::listen(fd, 512) != 0) {
            ::close(fd);
            cleanup_and_throw("bind tcp port " + std::to_string(port));
        }
        tcp_fds_.push_back(fd);
        tcp_bound_.push_back(bound_port(fd));
    }
    for (uint16_t port : cfg_.udp_ports) {
        int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
        if (fd < 0)
            cleanup_and_throw("socket");
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        auto addr = make_addr(cfg_.bind_addr, port);
        if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
            ::close(fd);
            cleanup_and_throw("bind udp port " + std::to_string(port));
        }
        set_recv_timeout(fd, 100);
        udp_fds_.push_back(fd);
        udp_bound_.push_back(bound_port(fd));
    }

    started_ = true;
    stopping_ = false;
    for (size_t i = 0; i < tcp_fds_.size(); ++i)
        accept_threads_.emplace_back([this, i] { accept_loop(tcp_fds_[i], tcp_bound_[i]); });
    for (size_t i = 0; i < udp_fds_.size(); ++i)
        worker_threads_.emplace_back([this, i] { udp_loop(udp_fds_[i], udp_bound_[i]); });
    for (unsigned i = 0; i < cfg_.worker_threads; ++i)
        worker_threads_.emplace_back([this] { conn_worker(); });
}

void Sensor::stop() {
    if (!started_)
        return;
    // Close the listeners first and wait for the accept loops, so every
    // accepted connection is queued before workers are told to drain.
    for (int fd : tcp_fds_)
        ::shutdown(fd, SHUT_RDWR);
    for (int fd : tcp_fds_)
        ::close(fd);
    for (auto& t : accept_threads_)
        t.join();
    accept_threads_.clear();
    {
        std::lock_guard lk(queue_mu_);
        stopping_ = true;
    }
    queue_cv_.notify_all();
    for (auto& t : worker_threads_)
        t.join();
    worker_threads_.clear();
    for (int fd : udp_fds_)
        ::close(fd);
    tcp_fds_.clear();
    udp_fds_.clear();
    started_ = false;
}

std::vector<uint16_t> Sensor::bound_tcp_ports() const {
    return tcp_bound_;
}
std::vector<uint16_t> Sensor::bound_udp_ports() const {
    return udp_bound_;
}

SensorCounters Sensor::counters() const {
    return SensorCounters{accepted_.load(), completed_.load(), udp_datagrams_.load()};
}

uint64_t Sensor::lines_logged() const {
    return writer_ ? writer_->lines_written() : 0;
}

LogRecord Sensor::make_record(const Conn& c, EventKind event) const {
    LogRecord rec;
    rec.timestamp = now_on_grid();
    rec.protocol = Protocol::Tcp;
    rec.event = event;
    rec.src_addr = c.peer_addr;
    rec.src_port = c.peer_port;
    rec.dst_addr = *Ipv4::from_string(cfg_.bind_addr);
    rec.dst_port = c.local_port;
    return rec;
}

void Sensor::log_event(const LogRecord& rec) {
    writer_->append_line(format_record(rec));
}

void Sensor::accept_loop(int listen_fd, uint16_t port) {
    for (;;) {
        sockaddr_in peer{};
        socklen_t len = sizeof peer;
        int fd = ::accept(listen_fd, reinterpret_cast<sockaddr*>(&peer), &len);
        if (fd < 0) {
            if (errno == EINTR)
                continue;
            return;  // listener closed (stop) or fatal
        }
        Conn c;
        c.fd = fd;
        c.peer_addr = Ipv4{ntohl(peer.sin_addr.s_addr)};
        c.peer_port = ntohs(peer.sin_port);
        c.local_port = port;

        accepted_.fetch_add(1);
        LogRecord start = make_record(c, EventKind::Start);
        start.detail = StartDetail{};
        log_event(start);

        set_recv_timeout(fd, 100);
        {
            std::lock_guard lk(queue_mu_);
            queue_.push_back(c);
        }
        queue_cv_.notify_one();
    }
}

void Sensor::conn_worker() {
    for (;;) {
        Conn c;
        {
            std::unique_lock lk(queue_mu_);
            queue_cv_.wait(lk, [&] { return stopping_ || !queue_.empty(); });
            if (queue_.empty()) {
                if (stopping_)
                    return;
                continue;
            }
            c = queue_.front();
            queue_.pop_front();
        }

        uint64_t received = 0;
        char buf[4096];
        auto deadline = steady_clock::now() + duration<double>(cfg_.max_conn_lifetime_s);
        for (;;) {
            ssize_t r = ::recv(c.fd, buf, sizeof buf, 0);
            if (r > 0) {
                received += uint64_t(r);
            } else if (r == 0) {
                break;  // clean close
            } else if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) {
                bool give_up;
                {
                    std::lock_guard lk(queue_mu_);
                    give_up = stopping_;
                }
                if (give_up || steady_clock::now() >= deadline)
                    break;
            } else {
                break;  // reset or other per-connection error; never fatal
            }
        }
        ::close(c.fd);

        LogRecord end = make_record(c, EventKind::End);
        // bytes as seen from the source: it sent `received`, we answered nothing
        end.detail = EndDetail{received, 0};
        log_event(end);
        completed_.fetch_add(1);
    }
}

void Sensor::udp_loop(int fd, uint16_t port) {
    char buf[65536];
    for (;;) {
        sockaddr_in peer{};
        socklen_t len = sizeof peer;
        ssize_t r = ::recvfrom(fd, buf, sizeof buf, 0, reinterpret_cast<sockaddr*>(&peer), &len);
        if (r < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) {
                std::lock_guard lk(queue_mu_);
                if (stopping_)
                    return;
                continue;
            }
            return;
        }
        if (r == 0)
            continue;

        LogRecord rec;
        rec.timestamp = now_on_grid();
        rec.protocol = Protocol::Udp;
        rec.event = EventKind::Packet;
        rec.src_addr = Ipv4{ntohl(peer.sin_addr.s_addr)};
        rec.src_port = ntohs(peer.sin_port);
        rec.dst_addr = *Ipv4::from_string(cfg_.bind_addr);
        rec.dst_port = port;
        rec.detail = PacketDetail{uint64_t(r), std::nullopt};
        log_event(rec);
        udp_datagrams_.fetch_add(1);
    }
}

}  // namespace logreaper
