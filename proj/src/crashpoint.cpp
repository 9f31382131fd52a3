#include "logreaper/crashpoint.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <string>

#include <unistd.h>

namespace logreaper::crashpoint {

namespace {

struct Config {
    bool armed = false;
    std::string name;
    std::atomic<long> remaining{1};

    Config() {
        const char* env = std::getenv("LOGREAPER_CRASHPOINT");
        if (!env || !*env)
            return;
        std::string spec(env);
        if (auto colon = spec.rfind(':'); colon != std::string::npos) {
            name = spec.substr(0, colon);
            remaining = std::atol(spec.c_str() + colon + 1);
            if (remaining < 1)
                remaining = 1;
        } else {
            name = spec;
        }
        armed = true;
    }
};

Config& config() {
    static Config c;
    return c;
}

}  // namespace

bool armed() noexcept {
    return config().armed;
}

void check(const char* name) noexcept {
    Config& c = config();
    if (!c.armed || c.name != name)
        return;
    if (c.remaining.fetch_sub(1) == 1)
        _exit(137);
}

}  // namespace logreaper::crashpoint
