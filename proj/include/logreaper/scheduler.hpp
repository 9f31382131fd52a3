#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "logreaper/clock.hpp"
#include "logreaper/cron.hpp"

namespace logreaper {

// Fixed-interval alternative to cron for sub-minute experiments; fires at
// anchor + k*interval.
struct EverySchedule {
    std::chrono::seconds interval{0};
    bool operator==(const EverySchedule&) const = default;
};

using AnySchedule = std::variant<CronSchedule, EverySchedule>;

// Next fire strictly after `after`. `anchor` seeds interval schedules
// (typically the scheduler's start instant); cron ignores it.
std::optional<TimePoint> schedule_next(const AnySchedule& s, TimePoint after, TimePoint anchor);

enum class FireOutcome : uint8_t { Ran, SkippedBusy, Failed };

struct FireRecord {
    TimePoint scheduled{};
    TimePoint started{};
    TimePoint finished{};
    FireOutcome outcome = FireOutcome::Ran;
    std::string error;
};

struct RunLog {
    std::vector<FireRecord> fires;

    size_t ran() const;
    size_t skipped() const;
    size_t failed() const;
};

struct SchedulerOptions {
    Clock* clock = nullptr;  // required
    TimePoint until = TimePoint::max();
    std::stop_token stop;
};

// Drives `job` at each fire instant. Jobs run inline on this thread, so at
// most one instance is ever active; fire instants that elapse while a job
// is still running are recorded as SkippedBusy (overlap policy: Skip).
// Job exceptions are recorded as Failed and do not stop the scheduler.
RunLog run_scheduler(const AnySchedule& s, const std::function<void()>& job,
                     const SchedulerOptions& opt);

}  // namespace logreaper
