#include "logreaper/flood.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <stdexcept>
#include <thread>
#include <vector>

namespace logreaper {

using namespace std::chrono;

FloodResult flood(const std::string& host, uint16_t port, uint32_t threads, double duration_s,
                  microseconds per_conn_pause) {
    if (threads == 0)
        throw std::invalid_argument("flood: threads must be positive");
    if (!(duration_s > 0))
        throw std::invalid_argument("flood: duration must be positive");

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw std::invalid_argument("flood: bad target address " + host);

    std::atomic<uint64_t> attempted{0}, completed{0}, refused{0};
    auto deadline = steady_clock::now() + duration<double>(duration_s);

    std::vector<std::thread> workers;
    workers.reserve(threads);
    for (uint32_t i = 0; i < threads; ++i) {
        workers.emplace_back([&] {
            while (steady_clock::now() < deadline) {
                int fd = ::socket(AF_INET, SOCK_STREAM, 0);
                if (fd < 0) {
                    refused.fetch_add(1);
                    std::this_thread::sleep_for(milliseconds(10));
                    continue;
                }
                timeval tv{2, 0};
                ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
                attempted.fetch_add(1);
                if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) == 0) {
                    ::close(fd);  // client closes first: EOF on the sensor side
                    completed.fetch_add(1);
                } else {
                    ::close(fd);
                    refused.fetch_add(1);
                }
                if (per_conn_pause.count() > 0)
                    std::this_thread::sleep_for(per_conn_pause);
            }
        });
    }
    for (auto& w : workers)
        w.join();

    return FloodResult{attempted.load(), completed.load(), refused.load()};
}

}  // namespace logreaper
