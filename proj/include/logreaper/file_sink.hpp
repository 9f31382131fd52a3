#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <unordered_map>

#include "logreaper/sink.hpp"

namespace logreaper {

struct FileSinkOptions {
    // fsync records.dat after each commit. Off by default: commit ordering
    // plus the trailer scan already survives process kills; fsync upgrades
    // that to power-loss durability at a heavy cost on small batches.
    bool fsync = false;
};

// Reference store: an append-only record log (records.dat) with
// length-prefixed, checksummed entries and a per-batch commit trailer,
// plus a side index (batches.idx) and a format MANIFEST. The record log
// is authoritative; a batch exists iff its trailer is intact. On open,
// any torn tail after the last valid trailer is discarded.
class FileSink final : public Sink {
public:
    explicit FileSink(const std::filesystem::path& dir, FileSinkOptions opt = {});
    ~FileSink() override;

    FileSink(const FileSink&) = delete;
    FileSink& operator=(const FileSink&) = delete;

    BatchHandle begin_batch() override;
    void append(BatchHandle h, const LogRecord& rec, std::string_view source_identity,
                uint64_t line_number) override;
    CommitResult commit(BatchHandle h, const IngestCursor* cursor = nullptr) override;
    void abort(BatchHandle h) override;

    uint64_t count(const RecordFilter& filter = {}) const override;
    std::vector<FlowAggregate> aggregate_flows(const RecordFilter& filter = {}) const override;
    uint64_t export_csv(std::ostream& out, const RecordFilter& filter = {}) const override;
    SinkStats stats() const override;

    bool has_batch(uint64_t batch_id) const override;
    std::optional<uint64_t> highest_line(std::string_view source_identity) const override;
    std::optional<CursorInfo> last_cursor() const override;

    const std::filesystem::path& directory() const { return dir_; }

private:
    struct BatchInfo {
        uint64_t record_count = 0;
        uint64_t start_offset = 0;
        uint64_t end_offset = 0;
    };

    void load();
    void check_token(BatchHandle h) const;
    void register_batch(uint64_t batch_id, std::vector<StoredRecord>&& records, uint64_t start,
                        uint64_t end);
    void write_index_line(uint64_t batch_id, const BatchInfo& info, const StoredRecord& first);
    void rewrite_index();

    std::filesystem::path dir_;
    FileSinkOptions opt_;
    int fd_ = -1;  // records.dat, append position == data_end_

    mutable std::mutex mu_;
    std::vector<StoredRecord> records_;
    std::unordered_map<std::string, uint64_t> highest_line_;
    std::map<std::pair<std::string, uint64_t>, uint64_t> first_key_to_batch_;
    std::map<uint64_t, BatchInfo> batches_;
    std::optional<CursorInfo> last_cursor_;
    uint64_t next_batch_id_ = 1;
    uint64_t data_end_ = 0;

    uint64_t open_token_ = 0;  // 0 = no open batch
    uint64_t next_token_ = 1;
    std::vector<StoredRecord> pending_;
};

}  // namespace logreaper
