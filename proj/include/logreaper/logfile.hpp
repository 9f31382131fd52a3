#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace logreaper {

// -- file identity ----------------------------------------------------------

struct FileId {
    uint64_t dev = 0;
    uint64_t ino = 0;
    bool operator==(const FileId&) const = default;
};

std::optional<FileId> stat_file_id(const std::filesystem::path& p);
std::optional<FileId> fstat_file_id(int fd);

// "<dev>:<ino>:g<gen>"
std::string make_identity(FileId id, uint64_t gen);
// gen suffix of any identity string ("none:g3" included); 0 if unparseable
uint64_t identity_gen(std::string_view identity);
// true when the identity's dev:ino matches `id` (gen ignored)
bool identity_matches(std::string_view identity, FileId id);
inline bool identity_is_none(std::string_view identity) {
    return identity.rfind("none", 0) == 0;
}
std::string none_identity(uint64_t last_gen);

// -- paths used by the rotation protocol -------------------------------------

std::filesystem::path lock_path(const std::filesystem::path& log);
std::filesystem::path redo_path(const std::filesystem::path& log);
std::filesystem::path redo_partial_path(const std::filesystem::path& log);
std::filesystem::path marker_path(const std::filesystem::path& log);
std::filesystem::path staging_path(const std::filesystem::path& log);
std::filesystem::path default_checkpoint_path(const std::filesystem::path& log);

// -- advisory log lock --------------------------------------------------------

// flock on a lock file; serializes writer appends against the compactor's
// rename/truncate steps (use lock_path(log)), and enforces the single
// compactor instance (instance_lock_path(log), try_lock).
class LogLock {
public:
    explicit LogLock(const std::filesystem::path& lock_file);
    ~LogLock();
    LogLock(const LogLock&) = delete;
    LogLock& operator=(const LogLock&) = delete;

    void lock();
    bool try_lock();
    void unlock();

private:
    int fd_ = -1;
    bool held_ = false;
};

std::filesystem::path instance_lock_path(const std::filesystem::path& log);

class LockGuard {
public:
    explicit LockGuard(LogLock& l) : lock_(l) { lock_.lock(); }
    ~LockGuard() { lock_.unlock(); }
    LockGuard(const LockGuard&) = delete;
    LockGuard& operator=(const LockGuard&) = delete;

private:
    LogLock& lock_;
};

// -- crash-safe in-place truncation ------------------------------------------
//
// Removing the consumed prefix of the active log is a two-step rewrite
// (copy the tail down, then ftruncate), which cannot be atomic. A redo
// file makes it crash-safe:
//
//   1. the tail [committed_offset, EOF) is streamed into "<log>.tail-redo"
//      (written under a .partial name, then renamed, so a complete redo
//      file is unambiguous);
//   2. the rewrite is applied to the log;
//   3. the redo file is renamed to "<log>.truncated" (the marker), which
//      the compactor consumes when it reconciles its checkpoint.
//
// Every writer and the compactor call resolve_pending_truncation before
// touching the log (under the lock), so a half-applied rewrite is always
// completed before any new append — which is what makes re-applying the
// redo idempotent.

struct TruncationHeader {
    uint64_t gen = 0;        // epoch being retired
    uint64_t tail_len = 0;
};

// Streams [offset, EOF) of `log` into the redo file. Returns the header.
TruncationHeader write_truncation_redo(const std::filesystem::path& log, uint64_t gen,
                                       uint64_t offset, bool fsync);

// Applies the redo rewrite to the log (idempotent) and promotes the redo
// file to the marker. No-op without a complete redo file.
void apply_truncation_redo(const std::filesystem::path& log, bool fsync);

// Reads the marker's header, if a marker exists.
std::optional<TruncationHeader> read_marker(const std::filesystem::path& log);

// Writer/compactor entry point (call with the lock held): deletes stale
// partial redo files and applies any pending redo. Returns true when a
// marker is present afterwards (checkpoint reconciliation pending).
bool resolve_pending_truncation(const std::filesystem::path& log, bool fsync = false);

// -- cooperative appender ------------------------------------------------------

// Single-writer append path used by the sensor and paced generators. Each
// append (one write() per line) runs under the log lock, resolves pending
// truncations, and reopens the file when the compactor renamed it away.
class LogWriter {
public:
    explicit LogWriter(const std::filesystem::path& log, bool fsync = false);
    ~LogWriter();
    LogWriter(const LogWriter&) = delete;
    LogWriter& operator=(const LogWriter&) = delete;

    void append_line(std::string_view line_without_newline);

    uint64_t lines_written() const { return lines_; }
    uint64_t bytes_written() const { return bytes_; }
    const std::filesystem::path& path() const { return log_; }

private:
    void reopen_if_replaced();

    std::filesystem::path log_;
    LogLock lock_;
    int fd_ = -1;
    bool fsync_ = false;
    uint64_t lines_ = 0;
    uint64_t bytes_ = 0;
};

}  // namespace logreaper
