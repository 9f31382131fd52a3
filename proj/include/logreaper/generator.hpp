#pragma once

#include <iosfwd>
#include <stop_token>

#include "logreaper/logfile.hpp"
#include "logreaper/record.hpp"

namespace logreaper {

// Load description for the synthetic flood generator: `threads` is the
// attack tool's concurrency knob, each worker emitting log lines at a
// fixed per-thread rate for the duration. Same seed, same profile ->
// byte-identical output.
struct FloodProfile {
    uint32_t threads = 1;
    double lines_per_thread_per_sec = 1.0;
    double duration_s = 1.0;
    uint64_t seed = 0;
    uint32_t src_pool_size = 256;  // distinct spoofed source addresses
    Ipv4 target_addr = Ipv4::from_octets(192, 168, 1, 20);
    uint16_t target_port = 80;

    // Throws std::invalid_argument when a field is out of range or the
    // line budget (threads * rate * duration) is not a whole number.
    void validate() const;
    uint64_t lines_per_thread() const;
    uint64_t expected_lines() const;
};

struct GeneratorReport {
    uint64_t lines_emitted = 0;
    uint64_t bytes_emitted = 0;  // line bytes including newlines
    double wall_s = 0;
};

// Emits the profile's full line budget to `out` as fast as possible:
// a deterministic merge of per-thread session streams (Start, a few
// packets, End) with monotone timestamps across the simulated duration.
GeneratorReport generate_log(const FloodProfile& profile, std::ostream& out);

// Same line sequence, but released against the wall clock so that a line
// with simulated offset t is written ~t seconds after the call begins.
// Falls back to catch-up bursts when the writer cannot keep pace, so the
// total line count is exact unless stopped early.
GeneratorReport generate_log_paced(const FloodProfile& profile, LogWriter& out,
                                   std::stop_token stop = {});

}  // namespace logreaper
