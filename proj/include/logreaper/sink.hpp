#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "logreaper/record.hpp"

namespace logreaper {

// A record as persisted: the parsed line plus its positional identity.
// (source_identity, line_number) is the dedup key; identical attack lines
// legitimately repeat, so identity is positional, not content-based.
struct StoredRecord {
    LogRecord record;
    std::string source_identity;
    uint64_t line_number = 0;  // 1-based within the source file
    uint64_t batch_id = 0;
};

// Optional half-open time range [from, to) plus field filters.
struct RecordFilter {
    std::optional<Instant> from;
    std::optional<Instant> to;
    std::optional<Protocol> protocol;
    std::optional<EventKind> event;

    bool matches(const LogRecord& rec) const {
        if (from && rec.timestamp < *from)
            return false;
        if (to && rec.timestamp >= *to)
            return false;
        if (protocol && rec.protocol != *protocol)
            return false;
        if (event && rec.event != *event)
            return false;
        return true;
    }
};

struct FlowAggregate {
    FlowKey flow;
    uint64_t record_count = 0;
    uint64_t packet_bytes = 0;    // sum of Packet sizes (tcp/udp/icmp)
    uint64_t sent_bytes = 0;      // sums from End records
    uint64_t received_bytes = 0;
    Instant first_seen{};
    Instant last_seen{};
};

struct SinkStats {
    uint64_t total_records = 0;
    uint64_t total_batches = 0;
    uint64_t bytes_on_disk = 0;
};

struct BatchHandle {
    uint64_t token = 0;
};

struct CommitResult {
    uint64_t batch_id = 0;
    bool replayed = false;  // batch content was already committed (exactly-once replay)
};

// Ingestion position after a batch: where the reader stood in the source
// when the batch was cut. Stored in the commit trailer so a lost or corrupt
// checkpoint can be rebuilt from the sink without guessing.
struct IngestCursor {
    std::string identity;
    uint64_t end_offset = 0;
    uint64_t end_line = 0;

    bool operator==(const IngestCursor&) const = default;
};

struct CursorInfo {
    IngestCursor cursor;
    uint64_t batch_id = 0;
};

class SinkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// CSV column order for export_csv (RFC-4180 quoting; icmp type/code are
// encoded in the flags column as "type(code)").
inline constexpr const char* kCsvHeader =
    "ts,proto,event,src,sport,dst,dport,sent,recv,size,flags,comment,source,line";

// Persistence boundary for parsed records (the durable store the compactor
// feeds). Batches commit atomically: after a crash a batch is either fully
// visible or fully absent. Re-committing a batch whose content is already
// stored is not an error; it returns the original batch_id. Line numbers
// must arrive in increasing order per source identity.
class Sink {
public:
    virtual ~Sink() = default;

    virtual BatchHandle begin_batch() = 0;
    virtual void append(BatchHandle h, const LogRecord& rec, std::string_view source_identity,
                        uint64_t line_number) = 0;
    virtual CommitResult commit(BatchHandle h, const IngestCursor* cursor = nullptr) = 0;
    virtual void abort(BatchHandle h) = 0;

    virtual uint64_t count(const RecordFilter& filter = {}) const = 0;
    virtual std::vector<FlowAggregate> aggregate_flows(const RecordFilter& filter = {}) const = 0;
    // Rows in (source_identity, line_number) order; returns rows written
    // (header excluded).
    virtual uint64_t export_csv(std::ostream& out, const RecordFilter& filter = {}) const = 0;
    virtual SinkStats stats() const = 0;

    // Recovery support
    virtual bool has_batch(uint64_t batch_id) const = 0;
    virtual std::optional<uint64_t> highest_line(std::string_view source_identity) const = 0;
    virtual std::optional<CursorInfo> last_cursor() const = 0;
};

}  // namespace logreaper
