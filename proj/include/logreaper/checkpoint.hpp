#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace logreaper {

// Durable ingestion cursor. file_identity is "<dev>:<ino>:g<gen>" where gen
// is an epoch counter bumped on every truncation or file adoption so that
// (identity, line) dedup keys stay unique across truncation and inode
// reuse; "none:g<gen>" marks no current source while preserving the
// lineage. records_ingested counts every line consumed from this identity,
// malformed ones included, so numbering is stable across replays.
struct Checkpoint {
    std::string file_identity = "none:g0";
    uint64_t committed_offset = 0;
    uint64_t last_batch_id = 0;
    uint64_t records_ingested = 0;

    bool operator==(const Checkpoint&) const = default;
};

struct CheckpointLoad {
    std::optional<Checkpoint> checkpoint;  // nullopt: missing or corrupt
    bool corrupt = false;
};

// File format, one line: "v1 <identity> <offset> <batch> <count> <crc32hex>"
// with the checksum taken over the five preceding space-joined fields.
std::string checkpoint_line(const Checkpoint& cp);

CheckpointLoad load_checkpoint(const std::filesystem::path& path);

// Atomic replace: temp file, flush (fsync optional), rename.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp, bool fsync = false);

}  // namespace logreaper
