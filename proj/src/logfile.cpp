#include "logreaper/logfile.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <charconv>
#include <cstring>
#include <stdexcept>
#include <system_error>
#include <vector>

namespace logreaper {

namespace fs = std::filesystem;

namespace {

constexpr size_t kCopyChunk = 64 * 1024;

[[noreturn]] void throw_errno(const std::string& what) {
    throw std::system_error(errno, std::generic_category(), what);
}

void write_all_fd(int fd, const char* p, size_t n) {
    while (n > 0) {
        ssize_t w = ::write(fd, p, n);
        if (w < 0) {
            if (errno == EINTR)
                continue;
            throw_errno("write");
        }
        p += w;
        n -= size_t(w);
    }
}

struct Fd {
    int fd = -1;
    explicit Fd(int f) : fd(f) {}
    ~Fd() {
        if (fd >= 0)
            ::close(fd);
    }
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
};

}  // namespace

std::optional<FileId> stat_file_id(const fs::path& p) {
    struct stat st{};
    if (::stat(p.c_str(), &st) != 0)
        return std::nullopt;
    return FileId{uint64_t(st.st_dev), uint64_t(st.st_ino)};
}

std::optional<FileId> fstat_file_id(int fd) {
    struct stat st{};
    if (::fstat(fd, &st) != 0)
        return std::nullopt;
    return FileId{uint64_t(st.st_dev), uint64_t(st.st_ino)};
}

std::string make_identity(FileId id, uint64_t gen) {
    return std::to_string(id.dev) + ":" + std::to_string(id.ino) + ":g" + std::to_string(gen);
}

uint64_t identity_gen(std::string_view identity) {
    auto pos = identity.rfind(":g");
    if (pos == std::string_view::npos)
        return 0;
    uint64_t gen = 0;
    auto s = identity.substr(pos + 2);
    std::from_chars(s.data(), s.data() + s.size(), gen);
    return gen;
}

bool identity_matches(std::string_view identity, FileId id) {
    std::string prefix = std::to_string(id.dev) + ":" + std::to_string(id.ino) + ":g";
    return identity.rfind(prefix, 0) == 0;
}

std::string none_identity(uint64_t last_gen) {
    return "none:g" + std::to_string(last_gen);
}

fs::path lock_path(const fs::path& log) {
    auto p = log;
    p += ".lock";
    return p;
}
fs::path redo_path(const fs::path& log) {
    auto p = log;
    p += ".tail-redo";
    return p;
}
fs::path redo_partial_path(const fs::path& log) {
    auto p = log;
    p += ".tail-redo.partial";
    return p;
}
fs::path marker_path(const fs::path& log) {
    auto p = log;
    p += ".truncated";
    return p;
}
fs::path staging_path(const fs::path& log) {
    auto p = log;
    p += ".staging";
    return p;
}
fs::path default_checkpoint_path(const fs::path& log) {
    auto p = log;
    p += ".checkpoint";
    return p;
}

LogLock::LogLock(const fs::path& lock_file) {
    fd_ = ::open(lock_file.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0)
        throw_errno("cannot open lock file " + lock_file.string());
}

LogLock::~LogLock() {
    if (held_)
        ::flock(fd_, LOCK_UN);
    if (fd_ >= 0)
        ::close(fd_);
}

void LogLock::lock() {
    while (::flock(fd_, LOCK_EX) != 0) {
        if (errno != EINTR)
            throw_errno("flock");
    }
    held_ = true;
}

bool LogLock::try_lock() {
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        if (errno == EWOULDBLOCK)
            return false;
        throw_errno("flock");
    }
    held_ = true;
    return true;
}

void LogLock::unlock() {
    if (held_) {
        ::flock(fd_, LOCK_UN);
        held_ = false;
    }
}

fs::path instance_lock_path(const fs::path& log) {
    auto p = log;
    p += ".compactor.lock";
    return p;
}

// Redo file layout: one text header line "gen <g> len <n>", then n raw
// payload bytes (the retained tail).
TruncationHeader write_truncation_redo(const fs::path& log, uint64_t gen, uint64_t offset,
                                       bool fsync) {
    Fd in(::open(log.c_str(), O_RDONLY));
    if (in.fd < 0)
        throw_errno("open log for redo");
    struct stat st{};
    if (::fstat(in.fd, &st) != 0)
        throw_errno("stat log");
    uint64_t size = uint64_t(st.st_size);
    uint64_t tail_len = size > offset ? size - offset : 0;

    auto partial = redo_partial_path(log);
    Fd out(::open(partial.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644));
    if (out.fd < 0)
        throw_errno("open redo partial");

    std::string header = "gen " + std::to_string(gen) + " len " + std::to_string(tail_len) + "\n";
    write_all_fd(out.fd, header.data(), header.size());

    std::vector<char> buf(kCopyChunk);
    uint64_t pos = offset;
    while (pos < size) {
        size_t want = size_t(std::min<uint64_t>(kCopyChunk, size - pos));
        ssize_t r = ::pread(in.fd, buf.data(), want, off_t(pos));
        if (r < 0)
            throw_errno("pread log tail");
        if (r == 0)
            break;
        write_all_fd(out.fd, buf.data(), size_t(r));
        pos += uint64_t(r);
    }
    if (fsync)
        ::fsync(out.fd);
    fs::rename(partial, redo_path(log));
    return TruncationHeader{gen, tail_len};
}

namespace {

std::optional<TruncationHeader> read_header(const fs::path& p, uint64_t* payload_at = nullptr) {
    Fd fd(::open(p.c_str(), O_RDONLY));
    if (fd.fd < 0)
        return std::nullopt;
    char buf[64];
    ssize_t r = ::pread(fd.fd, buf, sizeof buf - 1, 0);
    if (r <= 0)
        return std::nullopt;
    buf[r] = 0;
    TruncationHeader h;
    unsigned long long g = 0, n = 0;
    int consumed = 0;
    if (std::sscanf(buf, "gen %llu len %llu\n%n", &g, &n, &consumed) != 2 || consumed <= 0)
        return std::nullopt;
    h.gen = g;
    h.tail_len = n;
    if (payload_at)
        *payload_at = uint64_t(consumed);
    return h;
}

}  // namespace

void apply_truncation_redo(const fs::path& log, bool fsync) {
    auto redo = redo_path(log);
    uint64_t payload_at = 0;
    auto header = read_header(redo, &payload_at);
    if (!header)
        return;

    Fd in(::open(redo.c_str(), O_RDONLY));
    if (in.fd < 0)
        throw_errno("open redo");
    Fd out(::open(log.c_str(), O_WRONLY | O_CREAT, 0644));
    if (out.fd < 0)
        throw_errno("open log for rewrite");

    std::vector<char> buf(kCopyChunk);
    uint64_t copied = 0;
    while (copied < header->tail_len) {
        size_t want = size_t(std::min<uint64_t>(kCopyChunk, header->tail_len - copied));
        ssize_t r = ::pread(in.fd, buf.data(), want, off_t(payload_at + copied));
        if (r < 0)
            throw_errno("pread redo payload");
        if (r == 0)
            throw std::runtime_error("redo file shorter than its header claims");
        ssize_t w = ::pwrite(out.fd, buf.data(), size_t(r), off_t(copied));
        if (w < 0)
            throw_errno("pwrite log");
        copied += uint64_t(w);
    }
    if (::ftruncate(out.fd, off_t(header->tail_len)) != 0)
        throw_errno("ftruncate log");
    if (fsync)
        ::fsync(out.fd);
    fs::rename(redo, marker_path(log));
}

std::optional<TruncationHeader> read_marker(const fs::path& log) {
    return read_header(marker_path(log));
}

bool resolve_pending_truncation(const fs::path& log, bool fsync) {
    std::error_code ec;
    fs::remove(redo_partial_path(log), ec);  // incomplete: the rewrite never started
    if (fs::exists(redo_path(log)))
        apply_truncation_redo(log, fsync);
    return fs::exists(marker_path(log));
}

LogWriter::LogWriter(const fs::path& log, bool fsync)
    : log_(log), lock_(lock_path(log)), fsync_(fsync) {
    fd_ = ::open(log_.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
    if (fd_ < 0)
        throw_errno("cannot open log " + log_.string());
}

LogWriter::~LogWriter() {
    if (fd_ >= 0)
        ::close(fd_);
}

void LogWriter::reopen_if_replaced() {
    auto on_disk = stat_file_id(log_);
    auto open_fd = fstat_file_id(fd_);
    if (on_disk && open_fd && *on_disk == *open_fd)
        return;
    ::close(fd_);
    fd_ = ::open(log_.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
    if (fd_ < 0)
        throw_errno("cannot reopen log " + log_.string());
}

void LogWriter::append_line(std::string_view line) {
    std::string data(line);
    data += '\n';
    LockGuard guard(lock_);
    resolve_pending_truncation(log_, fsync_);
    reopen_if_replaced();
    write_all_fd(fd_, data.data(), data.size());
    if (fsync_)
        ::fsync(fd_);
    lines_ += 1;
    bytes_ += data.size();
}

}  // namespace logreaper
