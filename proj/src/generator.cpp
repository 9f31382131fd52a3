#include "logreaper/generator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <queue>
#include <random>
#include <stdexcept>
#include <thread>
#include <unordered_set>
#include <vector>

#include "logreaper/parser.hpp"

namespace logreaper {

using namespace std::chrono;

namespace {

// Simulated timeline origin; arbitrary but fixed so output depends only on
// the profile.
constexpr int64_t kBaseUs = 1'609'459'200'000'000LL;  // 2021-01-01T00:00:00Z

constexpr const char* kFlagTokens[] = {"S", "A", "P", "F", "R", "SA", "PA", "FA"};
constexpr const char* kFingerprints[] = {
    "Windows XP SP1", "Linux 2.6", "FreeBSD 8.0", "Windows 7", "Linux 3.2", "OpenBSD 4.9",
};

std::vector<Ipv4> build_src_pool(uint64_t seed, uint32_t size) {
    std::mt19937_64 rng(seed ^ 0x5eedb00cULL);
    std::unordered_set<uint32_t> seen;
    std::vector<Ipv4> pool;
    pool.reserve(size);
    while (pool.size() < size) {
        uint32_t v = uint32_t(rng());
        // avoid 0.x and 255.x noise; anything else is fine for spoofed sources
        uint32_t hi = v >> 24;
        if (hi == 0 || hi == 255)
            continue;
        if (seen.insert(v).second)
            pool.push_back(Ipv4{v});
    }
    return pool;
}

// One worker's deterministic line stream: sessions of S, 0-3 packets, E;
// a single stray packet line when one line of budget remains.
class ThreadStream {
public:
    ThreadStream(const FloodProfile& p, const std::vector<Ipv4>& pool, uint32_t thread_id)
        : profile_(p),
          pool_(pool),
          rng_(p.seed * 0x9e3779b97f4a7c15ULL + thread_id + 1),
          remaining_(p.lines_per_thread()) {}

    bool done() const { return remaining_ == 0; }

    // 100us ticks since the simulated start for the next line.
    int64_t next_tick() const {
        return int64_t(std::llround(double(emitted_) * 10000.0 /
                                    profile_.lines_per_thread_per_sec));
    }

    LogRecord next() {
        if (session_left_ == 0)
            begin_session();
        LogRecord rec;
        rec.timestamp = Instant(microseconds(kBaseUs + next_tick() * 100));
        rec.protocol = Protocol::Tcp;
        rec.src_addr = src_;
        rec.src_port = src_port_;
        rec.dst_addr = profile_.target_addr;
        rec.dst_port = profile_.target_port;

        if (single_packet_) {
            rec.event = EventKind::Packet;
            rec.detail = PacketDetail{pick(40, 1460), flag_token()};
        } else if (!started_) {
            rec.event = EventKind::Start;
            StartDetail d;
            if (pick(0, 99) < 15)
                d.comment = kFingerprints[pick(0, std::size(kFingerprints) - 1)];
            rec.detail = std::move(d);
            started_ = true;
        } else if (session_left_ == 1) {
            rec.event = EventKind::End;
            rec.detail = EndDetail{session_bytes_, pick(0, 400)};
        } else {
            rec.event = EventKind::Packet;
            uint64_t size = pick(40, 1460);
            session_bytes_ += size;
            rec.detail = PacketDetail{size, flag_token()};
        }
        --session_left_;
        --remaining_;
        ++emitted_;
        return rec;
    }

private:
    uint64_t pick(uint64_t lo, uint64_t hi) {
        return std::uniform_int_distribution<uint64_t>(lo, hi)(rng_);
    }

    std::optional<std::string> flag_token() {
        if (pick(0, 2) == 0)
            return std::nullopt;
        return std::string(kFlagTokens[pick(0, std::size(kFlagTokens) - 1)]);
    }

    void begin_session() {
        src_ = pool_[pick(0, pool_.size() - 1)];
        src_port_ = uint16_t(pick(1024, 65535));
        session_bytes_ = 0;
        started_ = false;
        if (remaining_ == 1) {
            single_packet_ = true;
            session_left_ = 1;
            return;
        }
        single_packet_ = false;
        uint64_t packets = std::min<uint64_t>(pick(0, 3), remaining_ - 2);
        session_left_ = 2 + packets;
    }

    const FloodProfile& profile_;
    const std::vector<Ipv4>& pool_;
    std::mt19937_64 rng_;
    uint64_t remaining_;
    uint64_t emitted_ = 0;
    uint64_t session_left_ = 0;
    uint64_t session_bytes_ = 0;
    Ipv4 src_{};
    uint16_t src_port_ = 0;
    bool started_ = false;
    bool single_packet_ = false;
};

// Deterministic k-way merge of the per-thread streams by (tick, thread).
class LineSequence {
public:
    explicit LineSequence(const FloodProfile& p)
        : pool_(build_src_pool(p.seed, p.src_pool_size)) {
        streams_.reserve(p.threads);
        for (uint32_t t = 0; t < p.threads; ++t)
            streams_.emplace_back(p, pool_, t);
        for (uint32_t t = 0; t < p.threads; ++t)
            if (!streams_[t].done())
                heap_.push({streams_[t].next_tick(), t});
    }

    // (tick, line) or nullopt when the budget is exhausted.
    std::optional<std::pair<int64_t, std::string>> next() {
        if (heap_.empty())
            return std::nullopt;
        auto [tick, t] = heap_.top();
        heap_.pop();
        std::string line = format_record(streams_[t].next());
        if (!streams_[t].done())
            heap_.push({streams_[t].next_tick(), t});
        return std::make_pair(tick, std::move(line));
    }

private:
    struct Entry {
        int64_t tick;
        uint32_t thread;
        bool operator>(const Entry& o) const {
            return tick != o.tick ? tick > o.tick : thread > o.thread;
        }
    };

    std::vector<Ipv4> pool_;
    std::vector<ThreadStream> streams_;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
};

}  // namespace

void FloodProfile::validate() const {
    if (threads == 0)
        throw std::invalid_argument("flood profile: threads must be positive");
    if (!(lines_per_thread_per_sec > 0))
        throw std::invalid_argument("flood profile: rate must be positive");
    if (!(duration_s > 0))
        throw std::invalid_argument("flood profile: duration must be positive");
    if (src_pool_size == 0)
        throw std::invalid_argument("flood profile: src pool must be positive");
    double per_thread = lines_per_thread_per_sec * duration_s;
    if (std::abs(per_thread - std::llround(per_thread)) > 1e-6)
        throw std::invalid_argument("flood profile: rate*duration must be a whole line count");
}

uint64_t FloodProfile::lines_per_thread() const {
    return uint64_t(std::llround(lines_per_thread_per_sec * duration_s));
}

uint64_t FloodProfile::expected_lines() const {
    return uint64_t(threads) * lines_per_thread();
}

GeneratorReport generate_log(const FloodProfile& profile, std::ostream& out) {
    profile.validate();
    auto t0 = steady_clock::now();
    GeneratorReport report;
    LineSequence seq(profile);
    while (auto item = seq.next()) {
        out << item->second << '\n';
        if (!out)
            break;  // sink write failure: stop with a partial report
        report.lines_emitted += 1;
        report.bytes_emitted += item->second.size() + 1;
    }
    out.flush();
    report.wall_s = duration<double>(steady_clock::now() - t0).count();
    return report;
}

GeneratorReport generate_log_paced(const FloodProfile& profile, LogWriter& out,
                                   std::stop_token stop) {
    profile.validate();
    auto t0 = steady_clock::now();
    GeneratorReport report;
    LineSequence seq(profile);
    while (auto item = seq.next()) {
        auto due = t0 + microseconds(item->first * 100);
        // sleep in short slices so a stop request lands promptly; a slow
        // writer simply bursts the backlog afterwards
        while (!stop.stop_requested()) {
            auto now = steady_clock::now();
            if (now >= due)
                break;
            std::this_thread::sleep_for(
                std::min(duration_cast<microseconds>(due - now), microseconds(50'000)));
        }
        if (stop.stop_requested())
            break;
        out.append_line(item->second);
        report.lines_emitted += 1;
        report.bytes_emitted += item->second.size() + 1;
    }
    report.wall_s = duration<double>(steady_clock::now() - t0).count();
    return report;
}

}  // namespace logreaper
