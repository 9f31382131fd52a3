#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <stop_token>

namespace logreaper {

using TimePoint = std::chrono::sys_time<std::chrono::milliseconds>;

// Injectable time source so schedulers and benches run against either the
// wall clock or a manually advanced simulation.
class Clock {
public:
    virtual ~Clock() = default;
    virtual TimePoint now() = 0;
    // Blocks until `t` (by this clock) or until stop; true when `t` was reached.
    virtual bool wait_until(TimePoint t, std::stop_token stop) = 0;
};

class SystemClock final : public Clock {
public:
    TimePoint now() override;
    bool wait_until(TimePoint t, std::stop_token stop) override;
};

// Manually advanced clock. wait_until parks callers until advance()/set()
// moves simulated time past their deadline.
class SimClock final : public Clock {
public:
    explicit SimClock(TimePoint start = TimePoint{});

    TimePoint now() override;
    bool wait_until(TimePoint t, std::stop_token stop) override;

    void advance(std::chrono::milliseconds d);
    void set(TimePoint t);

private:
    mutable std::mutex mu_;
    std::condition_variable_any cv_;
    TimePoint now_;
};

}  // namespace logreaper
