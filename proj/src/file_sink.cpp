#include "logreaper/file_sink.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "logreaper/crashpoint.hpp"
#include "logreaper/parser.hpp"

namespace logreaper {

namespace fs = std::filesystem;

namespace {

constexpr char kManifestText[] = "logreaper-sink v1\n";
constexpr uint8_t kKindRecord = 'R';
constexpr uint8_t kKindCommit = 'C';
constexpr size_t kEntryHeader = 1 + 4 + 4;  // kind, payload len, payload crc
constexpr uint32_t kMaxPayload = 1u << 26;

void put_u16(std::string& b, uint16_t v) {
    b.push_back(char(v & 0xff));
    b.push_back(char(v >> 8));
}
void put_u32(std::string& b, uint32_t v) {
    for (int i = 0; i < 4; ++i)
        b.push_back(char((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& b, uint64_t v) {
    for (int i = 0; i < 8; ++i)
        b.push_back(char((v >> (8 * i)) & 0xff));
}

struct Cursor {
    const char* p;
    const char* end;
    bool ok = true;

    bool need(size_t n) {
        if (size_t(end - p) < n) {
            ok = false;
            return false;
        }
        return true;
    }
    uint8_t u8() {
        if (!need(1)) return 0;
        return uint8_t(*p++);
    }
    uint16_t u16() {
        if (!need(2)) return 0;
        uint16_t v = uint16_t(uint8_t(p[0])) | uint16_t(uint8_t(p[1])) << 8;
        p += 2;
        return v;
    }
    uint32_t u32() {
        if (!need(4)) return 0;
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= uint32_t(uint8_t(p[i])) << (8 * i);
        p += 4;
        return v;
    }
    uint64_t u64() {
        if (!need(8)) return 0;
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= uint64_t(uint8_t(p[i])) << (8 * i);
        p += 8;
        return v;
    }
    std::string str(size_t n) {
        if (!need(n)) return {};
        std::string s(p, n);
        p += n;
        return s;
    }
};

std::string encode_record(const StoredRecord& sr) {
    std::string b;
    put_u16(b, uint16_t(sr.source_identity.size()));
    b += sr.source_identity;
    put_u64(b, sr.line_number);
    const LogRecord& r = sr.record;
    put_u64(b, uint64_t(r.timestamp.time_since_epoch().count()));
    b.push_back(char(r.protocol));
    b.push_back(char(r.event));
    put_u32(b, r.src_addr.value);
    put_u16(b, r.src_port);
    put_u32(b, r.dst_addr.value);
    put_u16(b, r.dst_port);
    if (auto* s = std::get_if<StartDetail>(&r.detail)) {
        b.push_back(0);
        b.push_back(s->comment ? 1 : 0);
        if (s->comment) {
            put_u16(b, uint16_t(s->comment->size()));
            b += *s->comment;
        }
    } else if (auto* e = std::get_if<EndDetail>(&r.detail)) {
        b.push_back(1);
        put_u64(b, e->bytes_sent);
        put_u64(b, e->bytes_received);
    } else if (auto* pk = std::get_if<PacketDetail>(&r.detail)) {
        b.push_back(2);
        put_u64(b, pk->size);
        b.push_back(pk->flags ? 1 : 0);
        if (pk->flags) {
            put_u16(b, uint16_t(pk->flags->size()));
            b += *pk->flags;
        }
    } else {
        const auto& ic = std::get<IcmpDetail>(r.detail);
        b.push_back(3);
        put_u32(b, ic.type);
        put_u32(b, ic.code);
        put_u64(b, ic.size);
    }
    return b;
}

bool decode_record(const std::string& payload, StoredRecord& out) {
    Cursor c{payload.data(), payload.data() + payload.size()};
    uint16_t idlen = c.u16();
    out.source_identity = c.str(idlen);
    out.line_number = c.u64();
    LogRecord& r = out.record;
    r.timestamp = Instant(std::chrono::microseconds(int64_t(c.u64())));
    r.protocol = Protocol(c.u8());
    r.event = EventKind(c.u8());
    r.src_addr.value = c.u32();
    r.src_port = c.u16();
    r.dst_addr.value = c.u32();
    r.dst_port = c.u16();
    switch (c.u8()) {
        case 0: {
            StartDetail d;
            if (c.u8()) {
                uint16_t len = c.u16();
                d.comment = c.str(len);
            }
            r.detail = std::move(d);
            break;
        }
        case 1: {
            EndDetail d;
            d.bytes_sent = c.u64();
            d.bytes_received = c.u64();
            r.detail = d;
            break;
        }
        case 2: {
            PacketDetail d;
            d.size = c.u64();
            if (c.u8()) {
                uint16_t len = c.u16();
                d.flags = c.str(len);
            }
            r.detail = std::move(d);
            break;
        }
        case 3: {
            IcmpDetail d;
            d.type = c.u32();
            d.code = c.u32();
            d.size = c.u64();
            r.detail = d;
            break;
        }
        default: return false;
    }
    return c.ok && c.p == c.end;
}

std::string encode_entry(uint8_t kind, const std::string& payload) {
    std::string e;
    e.reserve(kEntryHeader + payload.size());
    e.push_back(char(kind));
    put_u32(e, uint32_t(payload.size()));
    put_u32(e, uint32_t(::crc32(0, reinterpret_cast<const Bytef*>(payload.data()),
                                uInt(payload.size()))));
    e += payload;
    return e;
}

void write_all(int fd, const char* p, size_t n) {
    while (n > 0) {
        ssize_t w = ::write(fd, p, n);
        if (w < 0) {
            if (errno == EINTR)
                continue;
            throw SinkError(std::string("sink write failed: ") + std::strerror(errno));
        }
        p += w;
        n -= size_t(w);
    }
}

void csv_field(std::string& row, std::string_view v) {
    bool quote = v.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!quote) {
        row += v;
        return;
    }
    row += '"';
    for (char c : v) {
        if (c == '"')
            row += '"';
        row += c;
    }
    row += '"';
}

uint64_t file_size_or_zero(const fs::path& p) {
    std::error_code ec;
    auto n = fs::file_size(p, ec);
    return ec ? 0 : uint64_t(n);
}

}  // namespace

FileSink::FileSink(const fs::path& dir, FileSinkOptions opt) : dir_(dir), opt_(opt) {
    fs::create_directories(dir_);
    auto manifest = dir_ / "MANIFEST";
    if (fs::exists(manifest)) {
        std::ifstream in(manifest);
        std::string line;
        std::getline(in, line);
        if (line != "logreaper-sink v1")
            throw SinkError("unsupported sink format: " + line);
    } else {
        std::ofstream out(manifest, std::ios::trunc);
        out << kManifestText;
    }
    load();

    fd_ = ::open((dir_ / "records.dat").c_str(), O_WRONLY | O_CREAT, 0644);
    if (fd_ < 0)
        throw SinkError("cannot open records.dat for writing");
    // Discard any torn tail past the last valid commit trailer.
    if (::ftruncate(fd_, off_t(data_end_)) != 0)
        throw SinkError("cannot truncate records.dat");
    if (::lseek(fd_, off_t(data_end_), SEEK_SET) < 0)
        throw SinkError("cannot seek records.dat");
    rewrite_index();
}

FileSink::~FileSink() {
    if (fd_ >= 0)
        ::close(fd_);
}

void FileSink::load() {
    std::ifstream in(dir_ / "records.dat", std::ios::binary);
    std::string data;
    if (in) {
        std::ostringstream ss;
        ss << in.rdbuf();
        data = ss.str();
    }

    size_t off = 0;
    std::vector<StoredRecord> pending;
    uint64_t pending_start = 0;
    while (off + kEntryHeader <= data.size()) {
        Cursor c{data.data() + off, data.data() + data.size()};
        uint8_t kind = c.u8();
        uint32_t len = c.u32();
        uint32_t crc = c.u32();
        if ((kind != kKindRecord && kind != kKindCommit) || len > kMaxPayload)
            break;
        if (off + kEntryHeader + len > data.size())
            break;
        std::string payload = data.substr(off + kEntryHeader, len);
        if (uint32_t(::crc32(0, reinterpret_cast<const Bytef*>(payload.data()), uInt(len))) != crc)
            break;

        if (kind == kKindRecord) {
            if (pending.empty())
                pending_start = off;
            StoredRecord sr;
            if (!decode_record(payload, sr))
                break;
            pending.push_back(std::move(sr));
        } else {
            Cursor t{payload.data(), payload.data() + payload.size()};
            uint64_t batch_id = t.u64();
            uint64_t count = t.u64();
            uint16_t fid_len = t.u16();
            t.str(fid_len);  // first-record identity, unused on load
            t.u64();         // first-record line
            uint16_t cid_len = t.u16();
            std::string cur_id = t.str(cid_len);
            uint64_t cur_off = t.u64();
            uint64_t cur_line = t.u64();
            if (!t.ok || count != pending.size())
                break;
            uint64_t end = off + kEntryHeader + len;
            uint64_t start = pending.empty() ? off : pending_start;
            register_batch(batch_id, std::move(pending), start, end);
            if (cid_len > 0)
                last_cursor_ = CursorInfo{IngestCursor{cur_id, cur_off, cur_line}, batch_id};
            pending.clear();
            data_end_ = end;
        }
        off += kEntryHeader + len;
    }
    // Anything after data_end_ (uncommitted records or a torn entry) is
    // dropped; the constructor truncates the file to data_end_.
}

void FileSink::register_batch(uint64_t batch_id, std::vector<StoredRecord>&& records,
                              uint64_t start, uint64_t end) {
    BatchInfo info{records.size(), start, end};
    if (!records.empty()) {
        first_key_to_batch_[{records.front().source_identity, records.front().line_number}] =
            batch_id;
    }
    for (auto& sr : records) {
        sr.batch_id = batch_id;
        auto& high = highest_line_[sr.source_identity];
        high = std::max(high, sr.line_number);
        records_.push_back(std::move(sr));
    }
    batches_[batch_id] = info;
    next_batch_id_ = std::max(next_batch_id_, batch_id + 1);
}

BatchHandle FileSink::begin_batch() {
    std::lock_guard lk(mu_);
    if (open_token_ != 0)
        throw SinkError("a batch is already open");
    open_token_ = next_token_++;
    pending_.clear();
    return BatchHandle{open_token_};
}

void FileSink::check_token(BatchHandle h) const {
    if (h.token == 0 || h.token != open_token_)
        throw SinkError("invalid or stale batch handle");
}

void FileSink::append(BatchHandle h, const LogRecord& rec, std::string_view source_identity,
                      uint64_t line_number) {
    std::lock_guard lk(mu_);
    check_token(h);
    if (!pending_.empty() && pending_.back().source_identity == source_identity &&
        line_number <= pending_.back().line_number)
        throw SinkError("line numbers must increase within a batch");
    StoredRecord sr;
    sr.record = rec;
    sr.source_identity = std::string(source_identity);
    sr.line_number = line_number;
    pending_.push_back(std::move(sr));
}

CommitResult FileSink::commit(BatchHandle h, const IngestCursor* cursor) {
    std::lock_guard lk(mu_);
    check_token(h);
    if (pending_.empty()) {
        open_token_ = 0;
        return CommitResult{0, false};
    }

    size_t dups = 0;
    for (const auto& sr : pending_) {
        auto it = highest_line_.find(sr.source_identity);
        if (it != highest_line_.end() && sr.line_number <= it->second)
            ++dups;
    }
    if (dups == pending_.size()) {
        // Replayed batch: identical content was committed before a crash
        // wiped the caller's checkpoint. Report the original id.
        auto it = first_key_to_batch_.find(
            {pending_.front().source_identity, pending_.front().line_number});
        if (it == first_key_to_batch_.end())
            throw SinkError("replayed records do not align with a committed batch");
        uint64_t original = it->second;
        if (batches_.at(original).record_count != pending_.size())
            throw SinkError("replayed batch size differs from the committed batch");
        pending_.clear();
        open_token_ = 0;
        return CommitResult{original, true};
    }
    if (dups > 0)
        throw SinkError("batch partially duplicates committed records");

    uint64_t batch_id = next_batch_id_;
    std::string blob;
    for (const auto& sr : pending_)
        blob += encode_entry(kKindRecord, encode_record(sr));

    std::string trailer_payload;
    put_u64(trailer_payload, batch_id);
    put_u64(trailer_payload, pending_.size());
    put_u16(trailer_payload, uint16_t(pending_.front().source_identity.size()));
    trailer_payload += pending_.front().source_identity;
    put_u64(trailer_payload, pending_.front().line_number);
    if (cursor) {
        put_u16(trailer_payload, uint16_t(cursor->identity.size()));
        trailer_payload += cursor->identity;
        put_u64(trailer_payload, cursor->end_offset);
        put_u64(trailer_payload, cursor->end_line);
    } else {
        put_u16(trailer_payload, 0);
        put_u64(trailer_payload, 0);
        put_u64(trailer_payload, 0);
    }
    std::string trailer = encode_entry(kKindCommit, trailer_payload);

    crashpoint::check("sink.commit.pre");
    write_all(fd_, blob.data(), blob.size());
    crashpoint::check("sink.commit.mid");  // records on disk, no trailer yet
    write_all(fd_, trailer.data(), trailer.size());
    if (opt_.fsync)
        ::fsync(fd_);
    crashpoint::check("sink.commit.post");

    uint64_t start = data_end_;
    data_end_ += blob.size() + trailer.size();
    auto first = pending_.front();
    register_batch(batch_id, std::move(pending_), start, data_end_);
    if (cursor)
        last_cursor_ = CursorInfo{*cursor, batch_id};
    pending_.clear();
    open_token_ = 0;
    write_index_line(batch_id, batches_.at(batch_id), first);
    return CommitResult{batch_id, false};
}

void FileSink::abort(BatchHandle h) {
    std::lock_guard lk(mu_);
    check_token(h);
    pending_.clear();
    open_token_ = 0;
}

void FileSink::write_index_line(uint64_t batch_id, const BatchInfo& info,
                                const StoredRecord& first) {
    std::ofstream out(dir_ / "batches.idx", std::ios::app);
    out << batch_id << ' ' << info.record_count << ' ' << info.start_offset << ' '
        << info.end_offset << ' ' << first.source_identity << ' ' << first.line_number << '\n';
}

void FileSink::rewrite_index() {
    std::ofstream out(dir_ / "batches.idx", std::ios::trunc);
    for (const auto& [id, info] : batches_) {
        out << id << ' ' << info.record_count << ' ' << info.start_offset << ' '
            << info.end_offset;
        // first-record key, if the batch has records
        for (const auto& [key, batch] : first_key_to_batch_) {
            if (batch == id) {
                out << ' ' << key.first << ' ' << key.second;
                break;
            }
        }
        out << '\n';
    }
}

uint64_t FileSink::count(const RecordFilter& filter) const {
    std::lock_guard lk(mu_);
    uint64_t n = 0;
    for (const auto& sr : records_)
        n += filter.matches(sr.record);
    return n;
}

std::vector<FlowAggregate> FileSink::aggregate_flows(const RecordFilter& filter) const {
    std::lock_guard lk(mu_);
    std::unordered_map<FlowKey, FlowAggregate, FlowKeyHash> agg;
    for (const auto& sr : records_) {
        if (!filter.matches(sr.record))
            continue;
        FlowKey key = FlowKey::of(sr.record);
        auto [it, fresh] = agg.try_emplace(key);
        FlowAggregate& a = it->second;
        if (fresh) {
            a.flow = key;
            a.first_seen = a.last_seen = sr.record.timestamp;
        } else {
            a.first_seen = std::min(a.first_seen, sr.record.timestamp);
            a.last_seen = std::max(a.last_seen, sr.record.timestamp);
        }
        a.record_count += 1;
        if (auto* p = std::get_if<PacketDetail>(&sr.record.detail)) {
            a.packet_bytes += p->size;
        } else if (auto* ic = std::get_if<IcmpDetail>(&sr.record.detail)) {
            a.packet_bytes += ic->size;
        } else if (auto* e = std::get_if<EndDetail>(&sr.record.detail)) {
            a.sent_bytes += e->bytes_sent;
            a.received_bytes += e->bytes_received;
        }
    }
    std::vector<FlowAggregate> out;
    out.reserve(agg.size());
    for (auto& [_, a] : agg)
        out.push_back(std::move(a));
    std::sort(out.begin(), out.end(), [](const FlowAggregate& x, const FlowAggregate& y) {
        return x.flow < y.flow;
    });
    return out;
}

uint64_t FileSink::export_csv(std::ostream& out, const RecordFilter& filter) const {
    std::vector<const StoredRecord*> rows;
    {
        std::lock_guard lk(mu_);
        rows.reserve(records_.size());
        for (const auto& sr : records_)
            if (filter.matches(sr.record))
                rows.push_back(&sr);
    }
    std::sort(rows.begin(), rows.end(), [](const StoredRecord* a, const StoredRecord* b) {
        if (a->source_identity != b->source_identity)
            return a->source_identity < b->source_identity;
        return a->line_number < b->line_number;
    });

    out << kCsvHeader << '\n';
    std::string row;
    for (const StoredRecord* sr : rows) {
        row.clear();
        const LogRecord& r = sr->record;
        row += format_timestamp(r.timestamp);
        row += ',';
        row += protocol_name(r.protocol);
        row += ',';
        row += r.event == EventKind::Start ? "S" : r.event == EventKind::End ? "E" : "-";
        row += ',';
        row += r.src_addr.to_string();
        row += ',';
        if (r.protocol != Protocol::Icmp)
            row += std::to_string(r.src_port);
        row += ',';
        row += r.dst_addr.to_string();
        row += ',';
        if (r.protocol != Protocol::Icmp)
            row += std::to_string(r.dst_port);
        row += ',';
        if (auto* e = std::get_if<EndDetail>(&r.detail)) {
            row += std::to_string(e->bytes_sent);
            row += ',';
            row += std::to_string(e->bytes_received);
            row += ",,";
        } else if (auto* p = std::get_if<PacketDetail>(&r.detail)) {
            row += ",,";
            row += std::to_string(p->size);
            row += ',';
            if (p->flags)
                csv_field(row, *p->flags);
        } else if (auto* ic = std::get_if<IcmpDetail>(&r.detail)) {
            row += ",,";
            row += std::to_string(ic->size);
            row += ',';
            row += std::to_string(ic->type) + "(" + std::to_string(ic->code) + ")";
        } else {
            row += ",,,";
        }
        row += ',';
        if (auto* s = std::get_if<StartDetail>(&r.detail); s && s->comment)
            csv_field(row, *s->comment);
        row += ',';
        csv_field(row, sr->source_identity);
        row += ',';
        row += std::to_string(sr->line_number);
        out << row << '\n';
    }
    return rows.size();
}

SinkStats FileSink::stats() const {
    std::lock_guard lk(mu_);
    SinkStats s;
    s.total_records = records_.size();
    s.total_batches = batches_.size();
    s.bytes_on_disk = file_size_or_zero(dir_ / "records.dat") +
                      file_size_or_zero(dir_ / "batches.idx") +
                      file_size_or_zero(dir_ / "MANIFEST");
    return s;
}

bool FileSink::has_batch(uint64_t batch_id) const {
    std::lock_guard lk(mu_);
    return batches_.count(batch_id) > 0;
}

std::optional<uint64_t> FileSink::highest_line(std::string_view source_identity) const {
    std::lock_guard lk(mu_);
    auto it = highest_line_.find(std::string(source_identity));
    if (it == highest_line_.end())
        return std::nullopt;
    return it->second;
}

std::optional<CursorInfo> FileSink::last_cursor() const {
    std::lock_guard lk(mu_);
    return last_cursor_;
}

}  // namespace logreaper
