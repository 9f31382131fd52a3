#include "doctest.h"

#include <sstream>

#include "logreaper/parser.hpp"
#include "support.hpp"

using namespace logreaper;
using testsup::Rng;

namespace {

const std::string kStartLine =
    "2005-05-03-19:39:58.0423 tcp(6) S 218.25.147.83 1687 192.168.1.20 1433 [Windows XP SP1]";
const std::string kEndLine =
    "2005-05-03-19:40:02.1037 tcp(6) E 218.25.147.83 1687 192.168.1.20 1433: 0 0";

LogRecord expect_record(const std::string& line) {
    auto r = parse_line(line);
    REQUIRE_MESSAGE(is_record(r), to_string(std::get<ParseError>(r)));
    return std::get<LogRecord>(r);
}

ParseError expect_error(const std::string& line) {
    auto r = parse_line(line);
    REQUIRE_FALSE(is_record(r));
    return std::get<ParseError>(r);
}

}  // namespace

TEST_CASE("parse start line with fingerprint comment") {
    LogRecord rec = expect_record(kStartLine);
    CHECK(rec.protocol == Protocol::Tcp);
    CHECK(rec.event == EventKind::Start);
    CHECK(rec.src_addr.to_string() == "218.25.147.83");
    CHECK(rec.src_port == 1687);
    CHECK(rec.dst_addr.to_string() == "192.168.1.20");
    CHECK(rec.dst_port == 1433);
    auto& d = std::get<StartDetail>(rec.detail);
    REQUIRE(d.comment.has_value());
    CHECK(*d.comment == "Windows XP SP1");
    CHECK(format_record(rec) == kStartLine);
}

TEST_CASE("parse end line with zero counters") {
    LogRecord rec = expect_record(kEndLine);
    CHECK(rec.event == EventKind::End);
    auto& d = std::get<EndDetail>(rec.detail);
    CHECK(d.bytes_sent == 0);
    CHECK(d.bytes_received == 0);
    CHECK(format_record(rec) == kEndLine);
}

TEST_CASE("space between date and time is rejected") {
    ParseError e = expect_error("2005-05-03 19:40:02 tcp S 1.2.3.4 1 5.6.7.8 2");
    CHECK(e.kind == ParseErrorKind::BadTimestamp);
    CHECK(e.byte_offset == 10);
}

TEST_CASE("format end record with zero counters ends in ': 0 0'") {
    LogRecord rec = expect_record(kEndLine);
    std::string line = format_record(rec);
    CHECK(line.substr(line.size() - 5) == ": 0 0");
}

TEST_CASE("format icmp echo packet") {
    LogRecord rec;
    rec.timestamp = expect_record(kStartLine).timestamp;
    rec.protocol = Protocol::Icmp;
    rec.event = EventKind::Packet;
    rec.src_addr = Ipv4::from_octets(10, 0, 0, 1);
    rec.dst_addr = Ipv4::from_octets(192, 168, 1, 20);
    rec.detail = IcmpDetail{8, 0, 84};
    std::string line = format_record(rec);
    CHECK(line.find("icmp(1) -") != std::string::npos);
    CHECK(line.find(": 8(0): 84") != std::string::npos);
    CHECK(expect_record(line) == rec);
}

TEST_CASE("error kinds pin down the failing field") {
    CHECK(expect_error("").kind == ParseErrorKind::TruncatedLine);
    CHECK(expect_error("2005-1").kind == ParseErrorKind::TruncatedLine);
    CHECK(expect_error("2005-13-03-19:39:58.0423 tcp(6) S 1.2.3.4 1 5.6.7.8 2").kind ==
          ParseErrorKind::BadTimestamp);
    CHECK(expect_error("2005-02-29-19:39:58.0423 tcp(6) S 1.2.3.4 1 5.6.7.8 2").kind ==
          ParseErrorKind::BadTimestamp);
    CHECK(expect_error("2005-05-03-19:39:58.0423 xtcp(6) S 1.2.3.4 1 5.6.7.8 2").kind ==
          ParseErrorKind::BadProtocol);
    CHECK(expect_error("2005-05-03-19:39:58.0423 tcp(6) X 1.2.3.4 1 5.6.7.8 2").kind ==
          ParseErrorKind::BadEventTag);
    CHECK(expect_error("2005-05-03-19:39:58.0423 icmp(1) S 1.2.3.4 5.6.7.8").kind ==
          ParseErrorKind::BadEventTag);
    CHECK(expect_error("2005-05-03-19:39:58.0423 tcp(6) S 256.1.1.1 1 5.6.7.8 2").kind ==
          ParseErrorKind::BadAddress);
    CHECK(expect_error("2005-05-03-19:39:58.0423 tcp(6) S 01.2.3.4 1 5.6.7.8 2").kind ==
          ParseErrorKind::BadAddress);
    CHECK(expect_error("2005-05-03-19:39:58.0423 tcp(6) S 1.2.3.4 65536 5.6.7.8 2").kind ==
          ParseErrorKind::BadPort);
    CHECK(expect_error("2005-05-03-19:39:58.0423 tcp(6) S 1.2.3.4 080 5.6.7.8 2").kind ==
          ParseErrorKind::BadPort);
    CHECK(expect_error("2005-05-03-19:39:58.0423 tcp(6) E 1.2.3.4 1 5.6.7.8 2").kind ==
          ParseErrorKind::TruncatedLine);
    CHECK(expect_error(kEndLine + " extra").kind == ParseErrorKind::TrailingGarbage);
    CHECK(expect_error("2005-05-03-19:39:58.0423 tcp(6) - 1.2.3.4 1 5.6.7.8 2: 0").kind ==
          ParseErrorKind::TrailingGarbage);
    CHECK(expect_error("2005-05-03-19:39:58.0423 tcp(6) S 1.2.3.4 1 5.6.7.8 2 junk").kind ==
          ParseErrorKind::TrailingGarbage);
    CHECK(expect_error("2005-05-03-19:39:58.0423 tcp(6) S 1.2.3.4 1 5.6.7.8 2 [open").kind ==
          ParseErrorKind::TruncatedLine);
    // port 0 is a legal value
    expect_record("2005-05-03-19:39:58.0423 tcp(6) S 1.2.3.4 0 5.6.7.8 0");
}

TEST_CASE("empty bracket comment is distinct from no comment") {
    std::string with = "2005-05-03-19:39:58.0423 tcp(6) S 1.2.3.4 1 5.6.7.8 2 []";
    std::string without = "2005-05-03-19:39:58.0423 tcp(6) S 1.2.3.4 1 5.6.7.8 2";
    LogRecord a = expect_record(with);
    LogRecord b = expect_record(without);
    CHECK(std::get<StartDetail>(a.detail).comment == std::string());
    CHECK_FALSE(std::get<StartDetail>(b.detail).comment.has_value());
    CHECK(format_record(a) == with);
    CHECK(format_record(b) == without);
}

TEST_CASE("read_from yields complete lines with advancing offsets") {
    std::string l1 = kStartLine, l2 = kEndLine;
    std::string l3 = "2005-05-03-19:40:03.0000 udp(17) - 10.0.0.1 53 10.0.0.2 53: 78";

    SUBCASE("three complete lines") {
        std::string data = l1 + "\n" + l2 + "\n" + l3 + "\n";
        std::istringstream in(data);
        auto items = read_from(in, 0);
        REQUIRE(items.size() == 3);
        for (auto& it : items)
            CHECK(is_record(it.value));
        CHECK(items[2].end_offset == data.size());
    }

    SUBCASE("partial trailing line is held back") {
        std::string data = l1 + "\n" + l2 + "\n" + l3.substr(0, 10);
        std::istringstream in(data);
        LogReader r(in, 0);
        size_t n = 0;
        while (r.next())
            ++n;
        CHECK(n == 2);
        CHECK(r.offset() == l1.size() + l2.size() + 2);
    }

    SUBCASE("garbage line is surfaced but reading continues") {
        std::string garbage = "!! not a log line !!";
        std::string data = l1 + "\n" + garbage + "\n" + l2 + "\n";
        std::istringstream in(data);
        auto items = read_from(in, 0);
        REQUIRE(items.size() == 3);
        CHECK(is_record(items[0].value));
        CHECK_FALSE(is_record(items[1].value));
        CHECK(is_record(items[2].value));
        CHECK(items[0].end_offset == l1.size() + 1);
        CHECK(items[1].end_offset == l1.size() + garbage.size() + 2);
        CHECK(items[2].end_offset == data.size());
    }

    SUBCASE("frozen-file mode yields the unterminated tail as a line") {
        std::string data = l1 + "\n" + l2;  // no final newline
        std::istringstream in(data);
        auto items = read_from(in, 0, /*treat_eof_as_line_end=*/true);
        REQUIRE(items.size() == 2);
        CHECK(is_record(items[1].value));
        CHECK(items[1].end_offset == data.size());
    }
}

TEST_CASE("prefix stability: re-reading from a returned offset") {
    std::string data = testsup::make_canonical_lines(50, 42);
    std::istringstream in(data);
    auto all = read_from(in, 0);
    REQUIRE(all.size() == 50);
    for (size_t k : {size_t(0), size_t(10), size_t(49)}) {
        std::istringstream in2(data);
        auto tail = read_from(in2, all[k].end_offset);
        REQUIRE(tail.size() == all.size() - k - 1);
        for (size_t i = 0; i < tail.size(); ++i) {
            CHECK(tail[i].value == all[k + 1 + i].value);
            CHECK(tail[i].end_offset == all[k + 1 + i].end_offset);
        }
    }
}

TEST_CASE("round-trip property over generated records") {
    Rng rng(7);
    for (int i = 0; i < 20000; ++i) {
        LogRecord rec = testsup::random_record(rng);
        std::string line = format_record(rec);
        auto back = parse_line(line);
        if (!is_record(back))
            FAIL("parse failed on: " << line << "  ->  "
                                     << to_string(std::get<ParseError>(back)));
        if (!(std::get<LogRecord>(back) == rec))
            FAIL("round-trip mismatch on: " << line);
    }
}

TEST_CASE("offset monotonicity") {
    std::string data = testsup::make_canonical_lines(200, 3);
    std::istringstream in(data);
    auto items = read_from(in, 0);
    uint64_t prev = 0;
    for (auto& it : items) {
        CHECK(it.end_offset > prev);
        REQUIRE(it.end_offset <= data.size());
        CHECK(data[it.end_offset - 1] == '\n');
        prev = it.end_offset;
    }
}

TEST_CASE("mutation fuzz yields records or typed errors, never crashes") {
    Rng rng(99);
    int errors = 0, records = 0;
    for (int i = 0; i < 3000; ++i) {
        std::string line = format_record(testsup::random_record(rng));
        size_t edits = 1 + testsup::pick(rng, 0, 2);
        for (size_t e = 0; e < edits && !line.empty(); ++e) {
            size_t pos = testsup::pick(rng, 0, line.size() - 1);
            switch (testsup::pick(rng, 0, 2)) {
                case 0: line[pos] = char(testsup::pick(rng, 1, 255)); break;
                case 1: line.erase(pos, 1); break;
                default: line.insert(pos, 1, char(testsup::pick(rng, 1, 255))); break;
            }
        }
        for (auto& c : line)
            if (c == '\n') c = ' ';
        auto r = parse_line(line);
        if (is_record(r)) {
            ++records;
            CHECK(std::get<LogRecord>(r).valid());
        } else {
            ++errors;
        }
    }
    CHECK(errors > 0);  // mutations overwhelmingly break lines
}

TEST_CASE("totality on arbitrary bytes") {
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        std::string junk;
        size_t len = testsup::pick(rng, 0, 4096);
        junk.reserve(len);
        for (size_t j = 0; j < len; ++j) {
            char c = char(testsup::pick(rng, 0, 255));
            junk += (c == '\n') ? ' ' : c;
        }
        auto r = parse_line(junk);
        if (!is_record(r))
            CHECK(std::get<ParseError>(r).excerpt.size() <= 64);
    }
}
