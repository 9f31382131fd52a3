#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "logreaper/record.hpp"

namespace logreaper {

using ParseResult = std::variant<LogRecord, ParseError>;

inline bool is_record(const ParseResult& r) { return std::holds_alternative<LogRecord>(r); }

// Parses one log line (no trailing newline). Returns a record or the first
// error encountered scanning left to right. Never throws on malformed input.
ParseResult parse_line(std::string_view line);

// Formats a record as its canonical line (no trailing newline). Throws
// std::invalid_argument if the record violates its invariants; canonical
// lines round-trip byte for byte through parse_line.
std::string format_record(const LogRecord& rec);

// Canonical timestamp text: "YYYY-MM-DD-HH:MM:SS.ffff" (UTC, 100 us grid).
std::string format_timestamp(Instant t);

// Strict inverse of format_timestamp; the ".ffff" part may be omitted.
std::optional<Instant> parse_timestamp(std::string_view text);

// One item from an incremental read: the parsed value plus the byte offset
// just past this line's newline.
struct ReadItem {
    ParseResult value;
    uint64_t end_offset = 0;
};

// Incremental line reader over a byte stream. Yields complete lines only:
// a trailing partial line (no newline yet) is held back, not an error, and
// offset() stops before it. With treat_eof_as_line_end (for frozen files
// that will never grow) the final unterminated bytes are yielded as a line.
class LogReader {
public:
    LogReader(std::istream& in, uint64_t start_offset, bool treat_eof_as_line_end = false);

    // Next complete line's parse result, or nullopt when the stream is
    // exhausted (offset() then is the high-water line boundary).
    std::optional<ReadItem> next();

    uint64_t offset() const { return offset_; }
    uint64_t lines_read() const { return lines_; }

private:
    std::istream& in_;
    uint64_t offset_ = 0;
    uint64_t lines_ = 0;
    bool eof_is_line_end_ = false;
    std::string buf_;
};

// Reads every complete line from start_offset. Convenience over LogReader.
std::vector<ReadItem> read_from(std::istream& in, uint64_t start_offset,
                                bool treat_eof_as_line_end = false);

}  // namespace logreaper
