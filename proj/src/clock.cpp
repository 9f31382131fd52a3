#include "logreaper/clock.hpp"

namespace logreaper {

TimePoint SystemClock::now() {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(
        std::chrono::system_clock::now());
}

bool SystemClock::wait_until(TimePoint t, std::stop_token stop) {
    std::mutex mu;
    std::condition_variable_any cv;
    std::unique_lock lk(mu);
    cv.wait_until(lk, stop, t, [] { return false; });
    return !stop.stop_requested() && now() >= t;
}

SimClock::SimClock(TimePoint start) : now_(start) {}

TimePoint SimClock::now() {
    std::lock_guard lk(mu_);
    return now_;
}

bool SimClock::wait_until(TimePoint t, std::stop_token stop) {
    std::unique_lock lk(mu_);
    cv_.wait(lk, stop, [&] { return now_ >= t; });
    return now_ >= t;
}

void SimClock::advance(std::chrono::milliseconds d) {
    {
        std::lock_guard lk(mu_);
        now_ += d;
    }
    cv_.notify_all();
}

void SimClock::set(TimePoint t) {
    {
        std::lock_guard lk(mu_);
        now_ = t;
    }
    cv_.notify_all();
}

}  // namespace logreaper
