#pragma once

#include <mutex>

#include "channelscope/time.hpp"

namespace channelscope::ingest {

// Wall-or-simulated time; everything that waits goes through this so the
// collection loop can be driven in tests without real sleeping.
class Clock {
public:
    virtual ~Clock() = default;
    virtual Timestamp now() = 0;
    virtual void sleep_until(Timestamp ts) = 0;
};

class SystemClock : public Clock {
public:
    Timestamp now() override;
    void sleep_until(Timestamp ts) override;
};

// Jumps forward on sleep; never blocks. Thread-safe: concurrent sleepers all
// observe a monotonically advancing time.
class SimulatedClock : public Clock {
public:
    explicit SimulatedClock(Timestamp start) : now_(start) {}

    Timestamp now() override {
        std::lock_guard lock(mu_);
        return now_;
    }

    void sleep_until(Timestamp ts) override {
        std::lock_guard lock(mu_);
        if (ts > now_) now_ = ts;
    }

private:
    std::mutex mu_;
    Timestamp now_;
};

}  // namespace channelscope::ingest
