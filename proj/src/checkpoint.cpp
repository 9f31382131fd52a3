#include "logreaper/checkpoint.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace logreaper {

namespace {

uint32_t crc_of(const std::string& s) {
    return uint32_t(::crc32(0, reinterpret_cast<const Bytef*>(s.data()), uInt(s.size())));
}

}  // namespace

std::string checkpoint_line(const Checkpoint& cp) {
    std::string fields = "v1 " + cp.file_identity + " " + std::to_string(cp.committed_offset) +
                         " " + std::to_string(cp.last_batch_id) + " " +
                         std::to_string(cp.records_ingested);
    char crc[16];
    std::snprintf(crc, sizeof crc, "%08x", crc_of(fields));
    return fields + " " + crc;
}

CheckpointLoad load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        return {std::nullopt, false};
    std::string line;
    std::getline(in, line);

    std::istringstream ss(line);
    std::string version, identity, crc_text;
    uint64_t offset = 0, batch = 0, count = 0;
    if (!(ss >> version >> identity >> offset >> batch >> count >> crc_text) || version != "v1")
        return {std::nullopt, true};

    std::string fields = version + " " + identity + " " + std::to_string(offset) + " " +
                         std::to_string(batch) + " " + std::to_string(count);
    char expect[16];
    std::snprintf(expect, sizeof expect, "%08x", crc_of(fields));
    if (crc_text != expect)
        return {std::nullopt, true};

    return {Checkpoint{identity, offset, batch, count}, false};
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp, bool fsync) {
    auto tmp = path;
    tmp += ".tmp";
    {
        int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        if (fd < 0)
            throw std::runtime_error("cannot write checkpoint temp file: " + tmp.string());
        std::string data = checkpoint_line(cp) + "\n";
        size_t off = 0;
        while (off < data.size()) {
            ssize_t w = ::write(fd, data.data() + off, data.size() - off);
            if (w < 0) {
                ::close(fd);
                throw std::runtime_error("checkpoint write failed");
            }
            off += size_t(w);
        }
        if (fsync)
            ::fsync(fd);
        ::close(fd);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace logreaper
