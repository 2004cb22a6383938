#include "channelscope/rate_limiter.hpp"

#include <stdexcept>

namespace channelscope::ingest {

RateLimiter::RateLimiter(int budget, Clock& clock, std::int64_t window_seconds)
    : budget_(budget), window_(window_seconds), clock_(clock) {
    if (budget <= 0) throw std::invalid_argument("rate limiter budget must be positive");
    if (window_seconds <= 0) throw std::invalid_argument("rate limiter window must be positive");
}

void RateLimiter::acquire() {
    std::lock_guard lock(mu_);
    for (;;) {
        Timestamp now = clock_.now();
        while (!issued_.empty() && issued_.front() <= now - window_) issued_.pop_front();
        if (static_cast<int>(issued_.size()) < budget_) {
            issued_.push_back(now);
            return;
        }
        clock_.sleep_until(issued_.front() + window_);
    }
}

}  // namespace channelscope::ingest
