#include "logreaper/scheduler.hpp"

#include <stdexcept>

namespace logreaper {

using namespace std::chrono;

std::optional<TimePoint> schedule_next(const AnySchedule& s, TimePoint after, TimePoint anchor) {
    if (auto* every = std::get_if<EverySchedule>(&s)) {
        if (every->interval <= seconds(0))
            return std::nullopt;
        auto iv = duration_cast<milliseconds>(every->interval);
        int64_t k = after < anchor ? 0 : (after - anchor) / iv;
        TimePoint t = anchor + iv * (k + 1);
        while (t <= after)
            t += iv;
        return t;
    }
    auto next = next_fire(std::get<CronSchedule>(s), floor<seconds>(after));
    if (!next)
        return std::nullopt;
    return TimePoint(duration_cast<milliseconds>(next->time_since_epoch()));
}

size_t RunLog::ran() const {
    size_t n = 0;
    for (auto& f : fires)
        n += f.outcome == FireOutcome::Ran;
    return n;
}

size_t RunLog::skipped() const {
    size_t n = 0;
    for (auto& f : fires)
        n += f.outcome == FireOutcome::SkippedBusy;
    return n;
}

size_t RunLog::failed() const {
    size_t n = 0;
    for (auto& f : fires)
        n += f.outcome == FireOutcome::Failed;
    return n;
}

RunLog run_scheduler(const AnySchedule& s, const std::function<void()>& job,
                     const SchedulerOptions& opt) {
    if (!opt.clock)
        throw std::invalid_argument("run_scheduler: clock is required");

    RunLog log;
    const TimePoint anchor = opt.clock->now();
    std::optional<TimePoint> next = schedule_next(s, anchor, anchor);

    while (next && *next <= opt.until) {
        if (!opt.clock->wait_until(*next, opt.stop))
            break;

        FireRecord rec;
        rec.scheduled = *next;
        rec.started = opt.clock->now();
        try {
            job();
            rec.outcome = FireOutcome::Ran;
        } catch (const std::exception& e) {
            rec.outcome = FireOutcome::Failed;
            rec.error = e.what();
        }
        rec.finished = opt.clock->now();
        log.fires.push_back(std::move(rec));

        TimePoint prev = *next;
        next = schedule_next(s, prev, anchor);
        // Fires that elapsed while the job was running are skipped, never
        // run late and never overlapped.
        while (next && *next <= opt.until && *next <= opt.clock->now()) {
            log.fires.push_back(FireRecord{*next, {}, {}, FireOutcome::SkippedBusy, {}});
            next = schedule_next(s, *next, anchor);
        }
    }
    return log;
}

}  // namespace logreaper
