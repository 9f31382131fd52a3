#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace logreaper {

// UTC instant at microsecond resolution. The wire format carries four
// fractional digits, so canonical timestamps sit on a 100 us grid.
using Instant = std::chrono::sys_time<std::chrono::microseconds>;

constexpr std::chrono::microseconds kTimestampGrid{100};

enum class Protocol : uint8_t { Tcp = 6, Udp = 17, Icmp = 1 };
enum class EventKind : uint8_t { Start, End, Packet };

const char* protocol_name(Protocol p);   // "tcp" / "udp" / "icmp"
int protocol_number(Protocol p);         // IANA number

// IPv4 address, host byte order.
struct Ipv4 {
    uint32_t value = 0;

    auto operator<=>(const Ipv4&) const = default;
    std::string to_string() const;
    static std::optional<Ipv4> from_string(std::string_view s);
    static constexpr Ipv4 from_octets(uint8_t a, uint8_t b, uint8_t c, uint8_t d) {
        return Ipv4{(uint32_t(a) << 24) | (uint32_t(b) << 16) | (uint32_t(c) << 8) | d};
    }
};

// Connection opened. The optional comment holds free text (honeyd puts an
// OS fingerprint there); it must not contain a newline.
struct StartDetail {
    std::optional<std::string> comment;
    bool operator==(const StartDetail&) const = default;
};

// Connection closed, with the session's byte counters as seen from the
// source side: bytes_sent is what the source transmitted, bytes_received
// what it got back.
struct EndDetail {
    uint64_t bytes_sent = 0;
    uint64_t bytes_received = 0;
    bool operator==(const EndDetail&) const = default;
};

// Single stateless TCP/UDP packet. Flags is a short token such as TCP
// flag letters; empty optional means none was logged.
struct PacketDetail {
    uint64_t size = 0;  // >= 1
    std::optional<std::string> flags;
    bool operator==(const PacketDetail&) const = default;
};

// Single ICMP packet. Type and code are the ICMP header fields (0-255).
struct IcmpDetail {
    uint32_t type = 0;
    uint32_t code = 0;
    uint64_t size = 0;  // >= 1
    bool operator==(const IcmpDetail&) const = default;
};

using EventDetail = std::variant<StartDetail, EndDetail, PacketDetail, IcmpDetail>;

// One parsed honeypot log line.
//
// Invariants:
//   - ports are 0-65535; ICMP records carry ports 0
//   - detail variant agrees with (protocol, event): Start->StartDetail,
//     End->EndDetail, Packet->PacketDetail for tcp/udp and IcmpDetail for
//     icmp; ICMP supports only Packet
//   - timestamp lies on the 100 us grid (the codec's resolution)
struct LogRecord {
    Instant timestamp{};
    Protocol protocol = Protocol::Tcp;
    EventKind event = EventKind::Start;
    Ipv4 src_addr{};
    uint16_t src_port = 0;
    Ipv4 dst_addr{};
    uint16_t dst_port = 0;
    EventDetail detail{};

    bool operator==(const LogRecord&) const = default;

    // True iff all record invariants hold (format_record requires this).
    bool valid() const;
};

// 5-tuple identity of a connection; derived deterministically from a record.
struct FlowKey {
    Protocol protocol = Protocol::Tcp;
    Ipv4 src_addr{};
    uint16_t src_port = 0;
    Ipv4 dst_addr{};
    uint16_t dst_port = 0;

    auto operator<=>(const FlowKey&) const = default;
    static FlowKey of(const LogRecord& rec);
};

struct FlowKeyHash {
    size_t operator()(const FlowKey& k) const;
};

enum class ParseErrorKind : uint8_t {
    BadTimestamp,
    BadProtocol,
    BadAddress,
    BadPort,
    BadEventTag,
    TruncatedLine,
    TrailingGarbage,
};

const char* parse_error_kind_name(ParseErrorKind k);

// One rejection reason with the byte offset where scanning failed and an
// excerpt (at most 64 bytes) of the offending input.
struct ParseError {
    ParseErrorKind kind = ParseErrorKind::TruncatedLine;
    size_t byte_offset = 0;
    std::string excerpt;

    bool operator==(const ParseError&) const = default;
};

std::string to_string(const ParseError& e);

}  // namespace logreaper
