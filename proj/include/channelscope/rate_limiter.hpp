#pragma once

#include <deque>
#include <mutex>

#include "channelscope/clock.hpp"

namespace channelscope::ingest {

// Request budget over a sliding window: a token spent at time t frees again
// at t + window. This keeps the count of issued requests in any window-sized
// interval at or below the budget, which a plain refill bucket cannot
// guarantee across window boundaries.
class RateLimiter {
public:
    RateLimiter(int budget, Clock& clock, std::int64_t window_seconds = 60);

    // Blocks (through the clock) until a token is available, then records the
    // issue time. Serializes concurrent acquirers.
    void acquire();

private:
    std::mutex mu_;
    int budget_;
    std::int64_t window_;
    Clock& clock_;
    std::deque<Timestamp> issued_;
};

}  // namespace channelscope::ingest
