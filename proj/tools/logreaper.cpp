#include <csignal>
#include <iostream>
#include <thread>

#include "logreaper/config.hpp"

namespace {

volatile std::sig_atomic_t g_signal = 0;

void on_signal(int) {
    g_signal = 1;
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::signal(SIGPIPE, SIG_IGN);

    // Bridge the async-signal flag into a stop token that long-running
    // subcommands (run, sense) poll.
    std::stop_source stop;
    std::jthread watcher([&stop](std::stop_token wt) {
        while (!wt.stop_requested()) {
            if (g_signal) {
                stop.request_stop();
                return;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
    });

    std::vector<std::string> args(argv + 1, argv + argc);
    int code = logreaper::run_cli(args, std::cout, std::cerr, stop.get_token());
    watcher.request_stop();
    return code;
}
