#include "logreaper/compactor.hpp"

#include <fstream>
#include <stdexcept>

#include "logreaper/crashpoint.hpp"
#include "logreaper/parser.hpp"

namespace logreaper {

namespace fs = std::filesystem;
using namespace std::chrono;

namespace {

uint64_t size_of(const fs::path& p) {
    std::error_code ec;
    auto n = fs::file_size(p, ec);
    return ec ? 0 : uint64_t(n);
}

void add_note(CompactionStats& stats, const std::string& note) {
    if (!stats.note.empty())
        stats.note += "; ";
    stats.note += note;
}

}  // namespace

Compactor::Compactor(fs::path log, Sink& sink, RotationMode mode, CompactorOptions opt)
    : log_(std::move(log)),
      sink_(sink),
      mode_(std::move(mode)),
      opt_(std::move(opt)),
      lock_(lock_path(log_)),
      instance_lock_(instance_lock_path(log_)) {
    if (opt_.checkpoint_path.empty())
        opt_.checkpoint_path = default_checkpoint_path(log_);
    if (opt_.batch_size == 0)
        opt_.batch_size = 1;
    if (mode_.kind == RotationMode::Kind::RotateArchive && mode_.archive_dir.empty()) {
        mode_.archive_dir = log_;
        mode_.archive_dir += ".archive";
    }
    if (!instance_lock_.try_lock())
        throw std::runtime_error("another compactor holds " + instance_lock_path(log_).string());
}

void Compactor::save(const Checkpoint& cp) {
    save_checkpoint(opt_.checkpoint_path, cp, opt_.fsync);
}

Checkpoint Compactor::checkpoint() const {
    auto res = load_checkpoint(opt_.checkpoint_path);
    return res.checkpoint ? *res.checkpoint : Checkpoint{};
}

Checkpoint Compactor::load_or_rebuild() {
    auto res = load_checkpoint(opt_.checkpoint_path);
    if (res.checkpoint)
        return *res.checkpoint;
    // Missing or corrupt: the sink's last commit trailer carries the exact
    // post-batch cursor, so the rebuilt checkpoint never re-ingests
    // committed data and never skips uncommitted data.
    if (auto info = sink_.last_cursor()) {
        return Checkpoint{info->cursor.identity, info->cursor.end_offset, info->batch_id,
                          info->cursor.end_line};
    }
    return Checkpoint{};
}

void Compactor::reconcile_marker(Checkpoint& cp) {
    auto marker = read_marker(log_);
    if (!marker)
        return;
    auto cur = stat_file_id(log_);
    if (cur && identity_matches(cp.file_identity, *cur)) {
        if (identity_gen(cp.file_identity) == marker->gen) {
            // A truncation of the checkpoint's epoch completed but the
            // checkpoint was not advanced before the crash.
            cp.file_identity = make_identity(*cur, marker->gen + 1);
            cp.committed_offset = 0;
            cp.records_ingested = 0;
            save(cp);
        }
    } else if (identity_is_none(cp.file_identity) &&
               identity_gen(cp.file_identity) <= marker->gen) {
        cp.file_identity = none_identity(marker->gen + 1);
        save(cp);
    }
    std::error_code ec;
    fs::remove(marker_path(log_), ec);
}

void Compactor::adopt_file(Checkpoint& cp, FileId id, const char* why, CompactionStats& stats) {
    uint64_t next_gen = identity_gen(cp.file_identity) + 1;
    cp.file_identity = make_identity(id, next_gen);
    cp.committed_offset = 0;
    cp.records_ingested = 0;
    add_note(stats, why);
}

Compactor::IngestOutcome Compactor::ingest(const fs::path& file, Checkpoint& cp, bool frozen,
                                           CompactionStats& stats) {
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + file.string());

    LogReader reader(in, cp.committed_offset, frozen);
    const uint64_t start_offset = cp.committed_offset;
    uint64_t line_cursor = cp.records_ingested;
    uint64_t item_offset = cp.committed_offset;

    // If a crash lost the checkpoint advance for an already-committed
    // batch, the replayed batch must end exactly where that batch ended so
    // the sink can recognize it. The sink's high-water line marks it.
    std::optional<uint64_t> replay_boundary = sink_.highest_line(cp.file_identity);

    std::optional<BatchHandle> batch;
    size_t in_batch = 0;

    auto flush = [&](uint64_t offset_now, uint64_t lines_now) {
        if (!batch)
            return;
        IngestCursor cursor{cp.file_identity, offset_now, lines_now};
        CommitResult res = sink_.commit(*batch, &cursor);
        batch.reset();
        stats.batches_committed += 1;
        stats.records_committed += in_batch;
        in_batch = 0;
        cp.last_batch_id = res.batch_id;
        cp.committed_offset = offset_now;
        cp.records_ingested = lines_now;
        crashpoint::check("compact.checkpoint.pre");
        save(cp);
        crashpoint::check("compact.checkpoint.post");
    };

    while (auto item = reader.next()) {
        ++line_cursor;
        item_offset = item->end_offset;
        if (is_record(item->value)) {
            if (!batch)
                batch = sink_.begin_batch();
            sink_.append(*batch, std::get<LogRecord>(item->value), cp.file_identity, line_cursor);
            ++in_batch;
            ++stats.records_parsed;
            if (in_batch >= opt_.batch_size ||
                (replay_boundary && line_cursor == *replay_boundary))
                flush(item_offset, line_cursor);
        } else {
            ++stats.parse_errors;
            if (stats.error_samples.size() < kErrorSampleLimit)
                stats.error_samples.push_back(std::get<ParseError>(item->value));
        }
    }
    flush(item_offset, line_cursor);
    if (cp.committed_offset != item_offset || cp.records_ingested != line_cursor) {
        // trailing malformed lines advanced the cursor without a batch
        cp.committed_offset = item_offset;
        cp.records_ingested = line_cursor;
        save(cp);
    }
    stats.bytes_consumed += item_offset - start_offset;
    return IngestOutcome{item_offset};
}

void Compactor::run_truncate(Checkpoint& cp, CompactionStats& stats) {
    // The whole pass holds the log lock: cooperative writers pause while
    // content is consumed and the prefix removed (copytruncate semantics).
    LockGuard guard(lock_);
    if (resolve_pending_truncation(log_, opt_.fsync))
        reconcile_marker(cp);

    // Leftover staging from a rotate-mode run: drain it first.
    auto staging = staging_path(log_);
    if (fs::exists(staging)) {
        auto sid = stat_file_id(staging);
        if (sid && !identity_matches(cp.file_identity, *sid))
            adopt_file(cp, *sid, "adopted leftover staging file", stats);
        save(cp);
        ingest(staging, cp, /*frozen=*/true, stats);
        fs::remove(staging);
        cp = Checkpoint{none_identity(identity_gen(cp.file_identity)), 0, cp.last_batch_id, 0};
        save(cp);
    }

    auto cur = stat_file_id(log_);
    if (!cur) {
        add_note(stats, "log file absent");
        return;
    }
    if (identity_is_none(cp.file_identity)) {
        adopt_file(cp, *cur, "new source", stats);
        save(cp);
    } else if (!identity_matches(cp.file_identity, *cur)) {
        stats.external_rotation = true;
        adopt_file(cp, *cur, "source replaced externally; starting fresh", stats);
        save(cp);
    } else if (cp.committed_offset > size_of(log_)) {
        stats.external_rotation = true;
        adopt_file(cp, *cur, "source shrank externally; starting fresh", stats);
        save(cp);
    }

    ingest(log_, cp, /*frozen=*/false, stats);

    if (cp.committed_offset > 0) {
        uint64_t consumed_prefix = cp.committed_offset;
        uint64_t gen = identity_gen(cp.file_identity);
        crashpoint::check("trunc.pre");
        write_truncation_redo(log_, gen, cp.committed_offset, opt_.fsync);
        crashpoint::check("trunc.redo-written");
        apply_truncation_redo(log_, opt_.fsync);  // promotes the redo to the marker
        crashpoint::check("trunc.applied");
        auto id = stat_file_id(log_);
        cp.file_identity = make_identity(id.value_or(*cur), gen + 1);
        cp.committed_offset = 0;
        cp.records_ingested = 0;
        save(cp);
        crashpoint::check("trunc.checkpointed");
        std::error_code ec;
        fs::remove(marker_path(log_), ec);
        stats.bytes_truncated = consumed_prefix;
    }
}

void Compactor::run_rotate(Checkpoint& cp, CompactionStats& stats) {
    fs::create_directories(mode_.archive_dir);
    auto staging = staging_path(log_);

    {
        // Swap phase: the writer's only pause is this rename.
        LockGuard guard(lock_);
        if (resolve_pending_truncation(log_, opt_.fsync))
            reconcile_marker(cp);
        if (!fs::exists(staging)) {
            auto cur = stat_file_id(log_);
            if (!cur) {
                add_note(stats, "log file absent");
                return;
            }
            if (identity_is_none(cp.file_identity)) {
                adopt_file(cp, *cur, "new source", stats);
                save(cp);
            } else if (!identity_matches(cp.file_identity, *cur)) {
                stats.external_rotation = true;
                adopt_file(cp, *cur, "source replaced externally; starting fresh", stats);
                save(cp);
            } else if (cp.committed_offset > size_of(log_)) {
                stats.external_rotation = true;
                adopt_file(cp, *cur, "source shrank externally; starting fresh", stats);
                save(cp);
            }
            if (size_of(log_) == 0)
                return;  // nothing to rotate
            fs::rename(log_, staging);
            // The writer recreates the active file on its next append.
        }
    }

    // Staging is frozen: ingest to EOF (an unterminated tail can never
    // complete, so it is surfaced as a final line) without holding the lock.
    auto sid = stat_file_id(staging);
    if (sid && !identity_matches(cp.file_identity, *sid)) {
        adopt_file(cp, *sid, "adopted staging file from an earlier run", stats);
        save(cp);
    }
    ingest(staging, cp, /*frozen=*/true, stats);

    crashpoint::check("rotate.pre-archive");
    fs::path dest;
    for (uint64_t seq = 1;; ++seq) {
        dest = mode_.archive_dir / (log_.filename().string() + "." + std::to_string(seq));
        if (!fs::exists(dest))
            break;
    }
    uint64_t consumed = cp.committed_offset;
    fs::rename(staging, dest);
    crashpoint::check("rotate.archived");
    cp = Checkpoint{none_identity(identity_gen(cp.file_identity)), 0, cp.last_batch_id, 0};
    save(cp);
    crashpoint::check("rotate.checkpointed");
    stats.bytes_truncated = consumed;
    add_note(stats, "archived " + dest.string());
}

CompactionStats Compactor::run_once() {
    auto t0 = steady_clock::now();
    CompactionStats stats;

    auto loaded = load_checkpoint(opt_.checkpoint_path);
    Checkpoint cp;
    if (loaded.checkpoint) {
        cp = *loaded.checkpoint;
    } else {
        cp = load_or_rebuild();
        if (loaded.corrupt)
            add_note(stats, "checkpoint was corrupt; rebuilt from sink cursor");
    }

    if (mode_.kind == RotationMode::Kind::TruncateInPlace)
        run_truncate(cp, stats);
    else
        run_rotate(cp, stats);

    stats.duration_s = duration<double>(steady_clock::now() - t0).count();
    return stats;
}

Checkpoint Compactor::recover() {
    LockGuard guard(lock_);
    auto loaded = load_checkpoint(opt_.checkpoint_path);
    Checkpoint cp;
    if (loaded.checkpoint) {
        cp = *loaded.checkpoint;
    } else {
        cp = load_or_rebuild();
        save(cp);
    }
    if (resolve_pending_truncation(log_, opt_.fsync))
        reconcile_marker(cp);
    return cp;
}

CompactionStats compact_once(const fs::path& log, Sink& sink, RotationMode mode,
                             CompactorOptions opt) {
    Compactor c(log, sink, std::move(mode), std::move(opt));
    return c.run_once();
}

CompactionDaemon::CompactionDaemon(Config cfg, Sink& sink) : cfg_(std::move(cfg)), sink_(sink) {
    compactor_ = std::make_unique<Compactor>(cfg_.log, sink_, cfg_.mode, cfg_.compactor);
}

CompactionDaemon::~CompactionDaemon() {
    request_stop();
    if (started_ && !joined_ && thread_.joinable())
        thread_.join();
}

void CompactionDaemon::start() {
    if (started_)
        throw std::logic_error("daemon already started");
    started_ = true;
    thread_ = std::thread([this] {
        try {
            compactor_->recover();
        } catch (const std::exception&) {
            {
                std::lock_guard lk(mu_);
                exit_code_ = 1;
            }
            finished_.store(true);
            return;
        }
        SchedulerOptions opt;
        opt.clock = &clock_;
        opt.stop = stop_.get_token();
        RunLog log = run_scheduler(
            cfg_.schedule,
            [this] {
                try {
                    CompactionStats s = compactor_->run_once();
                    std::lock_guard lk(mu_);
                    runs_.push_back(std::move(s));
                    consecutive_failures_ = 0;
                } catch (...) {
                    bool give_up = false;
                    {
                        std::lock_guard lk(mu_);
                        give_up = ++consecutive_failures_ >= cfg_.max_consecutive_failures;
                    }
                    if (give_up) {
                        std::lock_guard lk(mu_);
                        exit_code_ = 1;
                        stop_.request_stop();
                    }
                    throw;
                }
            },
            opt);
        {
            std::lock_guard lk(mu_);
            schedule_log_ = std::move(log);
        }
        finished_.store(true);
    });
}

bool CompactionDaemon::finished() const {
    return finished_.load();
}

void CompactionDaemon::request_stop() {
    stop_.request_stop();
}

int CompactionDaemon::join() {
    if (started_ && !joined_) {
        thread_.join();
        joined_ = true;
    }
    std::lock_guard lk(mu_);
    return exit_code_;
}

std::vector<CompactionStats> CompactionDaemon::runs() const {
    std::lock_guard lk(mu_);
    return runs_;
}

RunLog CompactionDaemon::schedule_log() const {
    std::lock_guard lk(mu_);
    return schedule_log_;
}

size_t CompactionDaemon::runs_completed() const {
    std::lock_guard lk(mu_);
    return runs_.size();
}

}  // namespace logreaper
