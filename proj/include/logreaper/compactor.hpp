#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "logreaper/checkpoint.hpp"
#include "logreaper/logfile.hpp"
#include "logreaper/scheduler.hpp"
#include "logreaper/sink.hpp"

namespace logreaper {

// How consumed log content is removed.
//   TruncateInPlace — consume-then-rewrite on the same inode, under the log
//     lock for the whole run (cooperative writers pause, matching classic
//     copytruncate behavior). Crash-safe via the redo protocol in logfile.hpp.
//   RotateArchive — rename the active log aside, ingest the frozen staging
//     file without blocking the writer, then move it into the archive
//     directory. Zero capture pause beyond the rename itself.
struct RotationMode {
    enum class Kind { TruncateInPlace, RotateArchive };
    Kind kind = Kind::TruncateInPlace;
    std::filesystem::path archive_dir;

    static RotationMode truncate_in_place() { return {}; }
    static RotationMode rotate_archive(std::filesystem::path dir) {
        return RotationMode{Kind::RotateArchive, std::move(dir)};
    }
};

struct CompactionStats {
    uint64_t bytes_consumed = 0;
    uint64_t records_parsed = 0;
    uint64_t parse_errors = 0;
    uint64_t records_committed = 0;  // == records_parsed on success
    uint64_t bytes_truncated = 0;
    uint64_t batches_committed = 0;
    double duration_s = 0;
    bool external_rotation = false;  // source replaced/shrunk outside the protocol
    std::vector<ParseError> error_samples;  // first kErrorSampleLimit kept
    std::string note;
};

struct CompactorOptions {
    size_t batch_size = 10000;
    bool fsync = false;
    std::filesystem::path checkpoint_path;  // default: "<log>.checkpoint"
};

inline constexpr size_t kErrorSampleLimit = 100;

// One compaction pass: parse everything past the checkpoint into the sink
// in atomic batches, advance the checkpoint after every commit, then
// remove the consumed prefix per the rotation mode. A sink failure leaves
// the log untouched and the checkpoint at the last committed batch.
class Compactor {
public:
    Compactor(std::filesystem::path log, Sink& sink, RotationMode mode, CompactorOptions opt = {});

    CompactionStats run_once();

    // Structural repair after an unclean shutdown: applies pending
    // truncations, reconciles the epoch marker, and rebuilds a missing or
    // corrupt checkpoint from the sink's last cursor. Does not ingest; a
    // clean shutdown makes this a no-op.
    Checkpoint recover();

    Checkpoint checkpoint() const;  // current durable checkpoint

    const std::filesystem::path& log_path() const { return log_; }

private:
    struct IngestOutcome {
        uint64_t high_water = 0;
    };

    Checkpoint load_or_rebuild();
    void reconcile_marker(Checkpoint& cp);
    void adopt_file(Checkpoint& cp, FileId id, const char* why, CompactionStats& stats);
    IngestOutcome ingest(const std::filesystem::path& file, Checkpoint& cp, bool frozen,
                         CompactionStats& stats);
    void save(const Checkpoint& cp);
    void run_truncate(Checkpoint& cp, CompactionStats& stats);
    void run_rotate(Checkpoint& cp, CompactionStats& stats);

    std::filesystem::path log_;
    Sink& sink_;
    RotationMode mode_;
    CompactorOptions opt_;
    LogLock lock_;           // writer/compactor rotation lock
    LogLock instance_lock_;  // held for this object's lifetime
};

CompactionStats compact_once(const std::filesystem::path& log, Sink& sink, RotationMode mode,
                             CompactorOptions opt = {});

// Long-running compaction driver: recover once, then run compact_once on
// every schedule fire. Stops on request (finishing any in-flight run) or
// after max_consecutive_failures back-to-back failing runs.
class CompactionDaemon {
public:
    struct Config {
        std::filesystem::path log;
        AnySchedule schedule = EverySchedule{std::chrono::seconds(60)};
        RotationMode mode;
        CompactorOptions compactor;
        int max_consecutive_failures = 5;
    };

    CompactionDaemon(Config cfg, Sink& sink);
    ~CompactionDaemon();

    void start();
    void request_stop();
    int join();  // 0 = clean stop, 1 = failure threshold exceeded
    bool finished() const;

    std::vector<CompactionStats> runs() const;
    RunLog schedule_log() const;
    size_t runs_completed() const;

private:
    Config cfg_;
    Sink& sink_;
    std::unique_ptr<Compactor> compactor_;
    SystemClock clock_;
    std::stop_source stop_;
    std::thread thread_;
    mutable std::mutex mu_;
    std::vector<CompactionStats> runs_;
    RunLog schedule_log_;
    int consecutive_failures_ = 0;
    int exit_code_ = 0;
    bool started_ = false;
    bool joined_ = false;
    std::atomic<bool> finished_{false};
};

}  // namespace logreaper
