#include "logreaper/parser.hpp"

#include <cstdio>
#include <cstring>
#include <istream>
#include <stdexcept>

namespace logreaper {

namespace {

constexpr size_t kTsLen = 24;  // "YYYY-MM-DD-HH:MM:SS.ffff"
constexpr size_t kExcerptMax = 64;

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_token_char(char c) { return c > 0x20 && c < 0x7f; }  // printable, non-space

std::string excerpt_at(std::string_view line, size_t offset) {
    size_t start = offset;
    if (start >= line.size())
        start = line.size() > kExcerptMax ? line.size() - kExcerptMax : 0;
    return std::string(line.substr(start, kExcerptMax));
}

ParseError make_error(std::string_view line, ParseErrorKind kind, size_t offset) {
    return ParseError{kind, offset, excerpt_at(line, offset)};
}

// Cursor over one line. Field scanners return false and leave err_ set on
// the first failure; the offset points at the byte where scanning stopped.
class Scanner {
public:
    explicit Scanner(std::string_view line) : line_(line) {}

    size_t pos() const { return pos_; }
    bool at_end() const { return pos_ >= line_.size(); }
    const ParseError& error() const { return err_; }

    bool fail(ParseErrorKind kind, size_t offset) {
        err_ = make_error(line_, kind, offset);
        return false;
    }

    // Exact literal; on mismatch reports `kind`, or TruncatedLine when the
    // remaining input is a proper prefix of the literal.
    bool literal(std::string_view lit, ParseErrorKind kind) {
        std::string_view rest = line_.substr(pos_);
        if (rest.size() >= lit.size() && rest.substr(0, lit.size()) == lit) {
            pos_ += lit.size();
            return true;
        }
        if (rest == lit.substr(0, rest.size()))
            return fail(ParseErrorKind::TruncatedLine, line_.size());
        return fail(kind, pos_);
    }

    // Canonical unsigned decimal: no leading zeros, fits in uint64.
    bool number(uint64_t& out, ParseErrorKind kind) {
        size_t start = pos_;
        if (at_end())
            return fail(ParseErrorKind::TruncatedLine, line_.size());
        if (!is_digit(line_[pos_]))
            return fail(kind, start);
        uint64_t v = 0;
        size_t digits = 0;
        while (!at_end() && is_digit(line_[pos_])) {
            if (v > (UINT64_MAX - 9) / 10)
                return fail(kind, start);
            v = v * 10 + uint64_t(line_[pos_] - '0');
            ++pos_;
            ++digits;
        }
        if (digits > 1 && line_[start] == '0')
            return fail(kind, start);
        out = v;
        return true;
    }

    bool bounded_number(uint64_t& out, uint64_t max, ParseErrorKind kind) {
        size_t start = pos_;
        if (!number(out, kind))
            return false;
        if (out > max) {
            pos_ = start;
            return fail(kind, start);
        }
        return true;
    }

    bool fixed_digits(unsigned width, uint32_t& out) {
        uint32_t v = 0;
        for (unsigned i = 0; i < width; ++i) {
            if (at_end())
                return fail(ParseErrorKind::TruncatedLine, line_.size());
            if (!is_digit(line_[pos_]))
                return fail(ParseErrorKind::BadTimestamp, pos_);
            v = v * 10 + uint32_t(line_[pos_] - '0');
            ++pos_;
        }
        out = v;
        return true;
    }

    bool ts_sep(char c) {
        if (at_end())
            return fail(ParseErrorKind::TruncatedLine, line_.size());
        if (line_[pos_] != c)
            return fail(ParseErrorKind::BadTimestamp, pos_);
        ++pos_;
        return true;
    }

    bool space(ParseErrorKind next_field_kind) {
        if (at_end())
            return fail(ParseErrorKind::TruncatedLine, line_.size());
        if (line_[pos_] != ' ')
            return fail(next_field_kind, pos_);
        ++pos_;
        return true;
    }

    bool timestamp(Instant& out) {
        uint32_t year, mon, day, hh, mm, ss, frac;
        if (!fixed_digits(4, year) || !ts_sep('-') || !fixed_digits(2, mon) || !ts_sep('-') ||
            !fixed_digits(2, day) || !ts_sep('-') || !fixed_digits(2, hh) || !ts_sep(':') ||
            !fixed_digits(2, mm) || !ts_sep(':') || !fixed_digits(2, ss) || !ts_sep('.') ||
            !fixed_digits(4, frac))
            return false;
        using namespace std::chrono;
        year_month_day ymd{std::chrono::year(int(year)), month(mon), std::chrono::day(day)};
        if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59)
            return fail(ParseErrorKind::BadTimestamp, pos_ - kTsLen);
        auto tp = sys_days(ymd) + hours(hh) + minutes(mm) + seconds(ss) +
                  microseconds(int64_t(frac) * 100);
        out = Instant(duration_cast<microseconds>(tp.time_since_epoch()));
        return true;
    }

    bool ipv4(Ipv4& out) {
        size_t start = pos_;
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            if (i > 0) {
                if (at_end())
                    return fail(ParseErrorKind::TruncatedLine, line_.size());
                if (line_[pos_] != '.')
                    return fail(ParseErrorKind::BadAddress, start);
                ++pos_;
            }
            uint64_t octet = 0;
            size_t ostart = pos_;
            if (!number(octet, ParseErrorKind::BadAddress))
                return err_.kind == ParseErrorKind::TruncatedLine
                           ? false
                           : fail(ParseErrorKind::BadAddress, start);
            if (octet > 255 || pos_ - ostart > 3)
                return fail(ParseErrorKind::BadAddress, start);
            v = (v << 8) | uint32_t(octet);
        }
        out = Ipv4{v};
        return true;
    }

    bool port(uint16_t& out) {
        size_t start = pos_;
        uint64_t v = 0;
        if (!number(v, ParseErrorKind::BadPort))
            return false;
        if (v > 65535)
            return fail(ParseErrorKind::BadPort, start);
        out = uint16_t(v);
        return true;
    }

    // Remaining bytes (consumes to end of line).
    std::string_view rest() {
        std::string_view r = line_.substr(pos_);
        pos_ = line_.size();
        return r;
    }

    char peek() const { return line_[pos_]; }
    void advance(size_t n) { pos_ += n; }

private:
    std::string_view line_;
    size_t pos_ = 0;
    ParseError err_{};
};

}  // namespace

const char* protocol_name(Protocol p) {
    switch (p) {
        case Protocol::Tcp: return "tcp";
        case Protocol::Udp: return "udp";
        case Protocol::Icmp: return "icmp";
    }
    return "?";
}

int protocol_number(Protocol p) { return int(p); }

std::string Ipv4::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", value >> 24, (value >> 16) & 0xff,
                  (value >> 8) & 0xff, value & 0xff);
    return buf;
}

std::optional<Ipv4> Ipv4::from_string(std::string_view s) {
    Scanner sc(s);
    Ipv4 out;
    if (!sc.ipv4(out) || !sc.at_end())
        return std::nullopt;
    return out;
}

FlowKey FlowKey::of(const LogRecord& rec) {
    return FlowKey{rec.protocol, rec.src_addr, rec.src_port, rec.dst_addr, rec.dst_port};
}

size_t FlowKeyHash::operator()(const FlowKey& k) const {
    uint64_t h = uint64_t(k.src_addr.value) << 32 | k.dst_addr.value;
    h ^= (uint64_t(k.src_port) << 24) | (uint64_t(k.dst_port) << 8) | uint64_t(k.protocol);
    h *= 0x9e3779b97f4a7c15ULL;
    h ^= h >> 32;
    return size_t(h);
}

const char* parse_error_kind_name(ParseErrorKind k) {
    switch (k) {
        case ParseErrorKind::BadTimestamp: return "BadTimestamp";
        case ParseErrorKind::BadProtocol: return "BadProtocol";
        case ParseErrorKind::BadAddress: return "BadAddress";
        case ParseErrorKind::BadPort: return "BadPort";
        case ParseErrorKind::BadEventTag: return "BadEventTag";
        case ParseErrorKind::TruncatedLine: return "TruncatedLine";
        case ParseErrorKind::TrailingGarbage: return "TrailingGarbage";
    }
    return "?";
}

std::string to_string(const ParseError& e) {
    std::string s = parse_error_kind_name(e.kind);
    s += " at byte ";
    s += std::to_string(e.byte_offset);
    if (!e.excerpt.empty()) {
        s += " near \"";
        s += e.excerpt;
        s += '"';
    }
    return s;
}

bool LogRecord::valid() const {
    if (timestamp.time_since_epoch().count() % kTimestampGrid.count() != 0)
        return false;
    using namespace std::chrono;
    // 4-digit year on the wire
    if (timestamp < Instant(duration_cast<microseconds>(sys_days(year(0) / 1 / 1).time_since_epoch())) ||
        timestamp >= Instant(duration_cast<microseconds>(sys_days(year(9999) / 12 / 31).time_since_epoch()) + hours(24)))
        return false;
    if (protocol == Protocol::Icmp) {
        if (event != EventKind::Packet || src_port != 0 || dst_port != 0)
            return false;
        auto* d = std::get_if<IcmpDetail>(&detail);
        return d && d->size >= 1 && d->type <= 255 && d->code <= 255;
    }
    switch (event) {
        case EventKind::Start: {
            auto* d = std::get_if<StartDetail>(&detail);
            return d && (!d->comment || d->comment->find('\n') == std::string::npos);
        }
        case EventKind::End:
            return std::holds_alternative<EndDetail>(detail);
        case EventKind::Packet: {
            auto* d = std::get_if<PacketDetail>(&detail);
            if (!d || d->size < 1)
                return false;
            if (d->flags) {
                if (d->flags->empty())
                    return false;
                for (char c : *d->flags)
                    if (!is_token_char(c))
                        return false;
            }
            return true;
        }
    }
    return false;
}

ParseResult parse_line(std::string_view line) {
    Scanner sc(line);
    LogRecord rec;

    if (!sc.timestamp(rec.timestamp))
        return sc.error();
    if (!sc.space(ParseErrorKind::BadProtocol))
        return sc.error();

    if (sc.literal("tcp(6)", ParseErrorKind::BadProtocol)) {
        rec.protocol = Protocol::Tcp;
    } else if (sc.error().kind == ParseErrorKind::TruncatedLine) {
        return sc.error();
    } else if (sc.literal("udp(17)", ParseErrorKind::BadProtocol)) {
        rec.protocol = Protocol::Udp;
    } else if (sc.error().kind == ParseErrorKind::TruncatedLine) {
        return sc.error();
    } else if (sc.literal("icmp(1)", ParseErrorKind::BadProtocol)) {
        rec.protocol = Protocol::Icmp;
    } else {
        return sc.error();
    }

    if (!sc.space(ParseErrorKind::BadEventTag))
        return sc.error();
    if (sc.at_end())
        return make_error(line, ParseErrorKind::TruncatedLine, line.size());

    size_t tag_pos = sc.pos();
    char tag = line[tag_pos];
    if (tag != 'S' && tag != 'E' && tag != '-')
        return make_error(line, ParseErrorKind::BadEventTag, tag_pos);
    if (rec.protocol == Protocol::Icmp && tag != '-')
        return make_error(line, ParseErrorKind::BadEventTag, tag_pos);
    rec.event = tag == 'S' ? EventKind::Start : tag == 'E' ? EventKind::End : EventKind::Packet;
    sc.advance(1);

    // Connection endpoints: "ip sport ip dport", or "ip ip" for icmp.
    if (!sc.space(ParseErrorKind::BadAddress))
        return sc.error();
    if (!sc.ipv4(rec.src_addr))
        return sc.error();
    if (rec.protocol != Protocol::Icmp) {
        if (!sc.space(ParseErrorKind::BadPort))
            return sc.error();
        if (!sc.port(rec.src_port))
            return sc.error();
    }
    if (!sc.space(ParseErrorKind::BadAddress))
        return sc.error();
    if (!sc.ipv4(rec.dst_addr))
        return sc.error();
    if (rec.protocol != Protocol::Icmp) {
        if (!sc.space(ParseErrorKind::BadPort))
            return sc.error();
        if (!sc.port(rec.dst_port))
            return sc.error();
    }

    // Detail section. All content-level violations here are reported as
    // TrailingGarbage; premature end of line as TruncatedLine.
    switch (rec.event) {
        case EventKind::Start: {
            StartDetail d;
            if (!sc.at_end()) {
                if (!sc.literal(" [", ParseErrorKind::TrailingGarbage))
                    return sc.error();
                std::string_view body = sc.rest();
                if (body.empty() || body.back() != ']')
                    return make_error(line, ParseErrorKind::TruncatedLine, line.size());
                d.comment = std::string(body.substr(0, body.size() - 1));
            }
            rec.detail = std::move(d);
            break;
        }
        case EventKind::End: {
            EndDetail d;
            if (!sc.literal(": ", ParseErrorKind::TrailingGarbage))
                return sc.error();
            if (!sc.number(d.bytes_sent, ParseErrorKind::TrailingGarbage))
                return sc.error();
            if (!sc.space(ParseErrorKind::TrailingGarbage))
                return sc.error();
            if (!sc.number(d.bytes_received, ParseErrorKind::TrailingGarbage))
                return sc.error();
            rec.detail = d;
            break;
        }
        case EventKind::Packet: {
            if (!sc.literal(": ", ParseErrorKind::TrailingGarbage))
                return sc.error();
            if (rec.protocol == Protocol::Icmp) {
                IcmpDetail d;
                uint64_t v = 0;
                size_t start = sc.pos();
                if (!sc.bounded_number(v, 255, ParseErrorKind::TrailingGarbage))
                    return sc.error();
                d.type = uint32_t(v);
                if (!sc.literal("(", ParseErrorKind::TrailingGarbage))
                    return sc.error();
                if (!sc.bounded_number(v, 255, ParseErrorKind::TrailingGarbage))
                    return sc.error();
                d.code = uint32_t(v);
                if (!sc.literal("): ", ParseErrorKind::TrailingGarbage))
                    return sc.error();
                start = sc.pos();
                if (!sc.number(d.size, ParseErrorKind::TrailingGarbage))
                    return sc.error();
                if (d.size < 1)
                    return make_error(line, ParseErrorKind::TrailingGarbage, start);
                rec.detail = d;
            } else {
                PacketDetail d;
                size_t start = sc.pos();
                if (!sc.number(d.size, ParseErrorKind::TrailingGarbage))
                    return sc.error();
                if (d.size < 1)
                    return make_error(line, ParseErrorKind::TrailingGarbage, start);
                if (!sc.at_end()) {
                    if (!sc.space(ParseErrorKind::TrailingGarbage))
                        return sc.error();
                    size_t fstart = sc.pos();
                    std::string_view tok = sc.rest();
                    if (tok.empty())
                        return make_error(line, ParseErrorKind::TruncatedLine, line.size());
                    for (char c : tok)
                        if (!is_token_char(c))
                            return make_error(line, ParseErrorKind::TrailingGarbage, fstart);
                    d.flags = std::string(tok);
                }
                rec.detail = std::move(d);
            }
            break;
        }
    }

    if (!sc.at_end())
        return make_error(line, ParseErrorKind::TrailingGarbage, sc.pos());
    return rec;
}

std::string format_timestamp(Instant t) {
    using namespace std::chrono;
    auto us = t.time_since_epoch();
    auto days = floor<std::chrono::days>(us);
    year_month_day ymd{sys_days(days)};
    auto tod = us - days;
    auto hh = duration_cast<hours>(tod);
    auto mm = duration_cast<minutes>(tod - hh);
    auto ss = duration_cast<seconds>(tod - hh - mm);
    auto frac = (tod - hh - mm - ss).count() / 100;

    char buf[32];
    int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02u-%02lld:%02lld:%02lld.%04lld",
                          int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()),
                          (long long)hh.count(), (long long)mm.count(), (long long)ss.count(),
                          (long long)frac);
    return std::string(buf, size_t(n));
}

std::optional<Instant> parse_timestamp(std::string_view text) {
    std::string padded(text);
    if (text.size() == kTsLen - 5)  // seconds precision: append a zero fraction
        padded += ".0000";
    Scanner sc(padded);
    Instant out;
    if (!sc.timestamp(out) || !sc.at_end())
        return std::nullopt;
    return out;
}

std::string format_record(const LogRecord& rec) {
    if (!rec.valid())
        throw std::invalid_argument("format_record: record violates invariants");

    char buf[64];
    int n = std::snprintf(buf, sizeof buf, " %s(%d) ", protocol_name(rec.protocol),
                          protocol_number(rec.protocol));
    std::string out = format_timestamp(rec.timestamp);
    out.append(buf, size_t(n));

    out += rec.event == EventKind::Start ? 'S' : rec.event == EventKind::End ? 'E' : '-';
    out += ' ';
    out += rec.src_addr.to_string();
    if (rec.protocol != Protocol::Icmp) {
        out += ' ';
        out += std::to_string(rec.src_port);
    }
    out += ' ';
    out += rec.dst_addr.to_string();
    if (rec.protocol != Protocol::Icmp) {
        out += ' ';
        out += std::to_string(rec.dst_port);
    }

    switch (rec.event) {
        case EventKind::Start: {
            const auto& d = std::get<StartDetail>(rec.detail);
            if (d.comment) {
                out += " [";
                out += *d.comment;
                out += ']';
            }
            break;
        }
        case EventKind::End: {
            const auto& d = std::get<EndDetail>(rec.detail);
            out += ": ";
            out += std::to_string(d.bytes_sent);
            out += ' ';
            out += std::to_string(d.bytes_received);
            break;
        }
        case EventKind::Packet: {
            if (rec.protocol == Protocol::Icmp) {
                const auto& d = std::get<IcmpDetail>(rec.detail);
                out += ": ";
                out += std::to_string(d.type);
                out += '(';
                out += std::to_string(d.code);
                out += "): ";
                out += std::to_string(d.size);
            } else {
                const auto& d = std::get<PacketDetail>(rec.detail);
                out += ": ";
                out += std::to_string(d.size);
                if (d.flags) {
                    out += ' ';
                    out += *d.flags;
                }
            }
            break;
        }
    }
    return out;
}

LogReader::LogReader(std::istream& in, uint64_t start_offset, bool treat_eof_as_line_end)
    : in_(in), offset_(start_offset), eof_is_line_end_(treat_eof_as_line_end) {
    in_.clear();
    in_.seekg(std::streamoff(start_offset));
}

std::optional<ReadItem> LogReader::next() {
    buf_.clear();
    if (!std::getline(in_, buf_))
        return std::nullopt;
    bool complete = !in_.eof();  // getline consumed a newline
    if (!complete && !eof_is_line_end_)
        return std::nullopt;  // partial tail held back; offset() stays before it
    if (!complete && buf_.empty())
        return std::nullopt;
    offset_ += buf_.size() + (complete ? 1 : 0);
    ++lines_;
    return ReadItem{parse_line(buf_), offset_};
}

std::vector<ReadItem> read_from(std::istream& in, uint64_t start_offset,
                                bool treat_eof_as_line_end) {
    LogReader r(in, start_offset, treat_eof_as_line_end);
    std::vector<ReadItem> items;
    while (auto item = r.next())
        items.push_back(std::move(*item));
    return items;
}

}  // namespace logreaper
