#pragma once

#include <chrono>
#include <cstdint>
#include <string>

namespace logreaper {

struct FloodResult {
    uint64_t attempted = 0;
    uint64_t completed = 0;  // connected and closed cleanly
    uint64_t refused = 0;    // refused, timed out or otherwise failed
};

// Best-effort TCP connect/close flood from `threads` workers until the
// duration elapses. Failures are counted, never fatal. The per-connection
// pause keeps a sustained run inside the client port budget (closing first
// leaves the TIME_WAIT on our side); pass zero for an unthrottled burst.
FloodResult flood(const std::string& host, uint16_t port, uint32_t threads, double duration_s,
                  std::chrono::microseconds per_conn_pause = std::chrono::microseconds(5000));

}  // namespace logreaper
