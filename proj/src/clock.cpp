#include "channelscope/clock.hpp"

#include <chrono>
#include <thread>

namespace channelscope::ingest {

Timestamp SystemClock::now() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

void SystemClock::sleep_until(Timestamp ts) {
    auto target = std::chrono::system_clock::time_point(std::chrono::seconds(ts));
    std::this_thread::sleep_until(target);
}

}  // namespace channelscope::ingest
