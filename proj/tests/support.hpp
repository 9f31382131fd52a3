#pragma once

// Shared test fixtures: temp directories, deterministic record generation,
// small file helpers.

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "logreaper/parser.hpp"
#include "logreaper/record.hpp"

namespace testsup {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        auto base = fs::temp_directory_path() / "logreaper-test-XXXXXX";
        std::string tmpl = base.string();
        if (!mkdtemp(tmpl.data()))
            throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

using Rng = std::mt19937_64;

inline uint64_t pick(Rng& rng, uint64_t lo, uint64_t hi) {
    return std::uniform_int_distribution<uint64_t>(lo, hi)(rng);
}

inline logreaper::Instant random_instant(Rng& rng) {
    // 2000-01-01 .. ~2033, on the 100 us grid
    int64_t ticks = int64_t(pick(rng, 0, 10'000'000'000'000ULL));  // 100us units over ~31y
    int64_t base_us = 946'684'800'000'000LL;                       // 2000-01-01T00:00:00Z
    return logreaper::Instant(std::chrono::microseconds(base_us + ticks * 100));
}

inline std::string random_comment(Rng& rng) {
    static const char cs[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 ._-[]()";
    size_t len = pick(rng, 1, 30);
    std::string s;
    for (size_t i = 0; i < len; ++i)
        s += cs[pick(rng, 0, sizeof(cs) - 2)];
    return s;
}

inline std::string random_flags(Rng& rng) {
    static const char cs[] = "SAFRPUEC";
    size_t len = pick(rng, 1, 6);
    std::string s;
    for (size_t i = 0; i < len; ++i)
        s += cs[pick(rng, 0, sizeof(cs) - 2)];
    return s;
}

inline logreaper::LogRecord random_record(Rng& rng) {
    using namespace logreaper;
    LogRecord rec;
    rec.timestamp = random_instant(rng);
    rec.src_addr = Ipv4{uint32_t(pick(rng, 0, UINT32_MAX))};
    rec.dst_addr = Ipv4{uint32_t(pick(rng, 0, UINT32_MAX))};
    switch (pick(rng, 0, 3)) {
        case 0:
            rec.protocol = Protocol::Icmp;
            rec.event = EventKind::Packet;
            rec.src_port = rec.dst_port = 0;
            rec.detail = IcmpDetail{uint32_t(pick(rng, 0, 255)), uint32_t(pick(rng, 0, 255)),
                                    pick(rng, 1, 65535)};
            return rec;
        case 1: rec.protocol = Protocol::Udp; break;
        default: rec.protocol = Protocol::Tcp; break;
    }
    rec.src_port = uint16_t(pick(rng, 0, 65535));
    rec.dst_port = uint16_t(pick(rng, 0, 65535));
    switch (pick(rng, 0, 2)) {
        case 0: {
            rec.event = EventKind::Start;
            StartDetail d;
            if (pick(rng, 0, 1))
                d.comment = random_comment(rng);
            rec.detail = std::move(d);
            break;
        }
        case 1: {
            rec.event = EventKind::End;
            uint64_t hi = pick(rng, 0, 9) == 0 ? UINT64_MAX : 1'000'000;
            rec.detail = EndDetail{pick(rng, 0, hi), pick(rng, 0, hi)};
            break;
        }
        default: {
            rec.event = EventKind::Packet;
            PacketDetail d;
            d.size = pick(rng, 1, 65535);
            if (pick(rng, 0, 1))
                d.flags = random_flags(rng);
            rec.detail = std::move(d);
            break;
        }
    }
    return rec;
}

// n canonical lines, newline-terminated, deterministic in seed.
inline std::string make_canonical_lines(size_t n, uint64_t seed) {
    Rng rng(seed);
    std::string out;
    for (size_t i = 0; i < n; ++i) {
        out += logreaper::format_record(random_record(rng));
        out += '\n';
    }
    return out;
}

struct ProcResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs a shell command, capturing stdout/stderr. Exit code is the child's
// (a process that _exit(137)s reports 137).
inline ProcResult run_cmd(const std::string& cmd) {
    TempDir tmp;
    auto out_path = tmp / "out";
    auto err_path = tmp / "err";
    std::string full = cmd + " > " + out_path.string() + " 2> " + err_path.string();
    int rc = std::system(full.c_str());
    ProcResult res;
    res.exit_code = rc < 0 ? -1 : (WIFEXITED(rc) ? WEXITSTATUS(rc) : 128 + WTERMSIG(rc));
    res.out = read_file(out_path);
    res.err = read_file(err_path);
    return res;
}

// Minimal RFC-4180 row splitter.
inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

inline std::vector<std::string> text_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l))
        lines.push_back(l);
    return lines;
}

// Rebuilds the canonical log line from an exported CSV row.
inline std::string line_from_row(const std::vector<std::string>& f) {
    const std::string &ts = f[0], &proto = f[1], &tag = f[2], &src = f[3], &sport = f[4],
                      &dst = f[5], &dport = f[6], &sent = f[7], &recv = f[8], &size = f[9],
                      &flags = f[10], &comment = f[11];
    std::string p = proto == "tcp" ? "tcp(6)" : proto == "udp" ? "udp(17)" : "icmp(1)";
    std::string line = ts + " " + p + " " + tag + " " + src;
    if (proto != "icmp")
        line += " " + sport;
    line += " " + dst;
    if (proto != "icmp")
        line += " " + dport;
    if (tag == "E") {
        line += ": " + sent + " " + recv;
    } else if (tag == "-") {
        if (proto == "icmp")
            line += ": " + flags + ": " + size;  // flags column holds "type(code)"
        else {
            line += ": " + size;
            if (!flags.empty())
                line += " " + flags;
        }
    } else if (!comment.empty()) {
        line += " [" + comment + "]";
    }
    return line;
}

}  // namespace testsup
