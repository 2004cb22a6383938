#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "channelscope/clock.hpp"
#include "channelscope/ingest.hpp"
#include "channelscope/rate_limiter.hpp"
#include "channelscope/source.hpp"

namespace channelscope::ingest {

struct PollFailure {
    enum class Kind { unavailable, no_answer, malformed };
    std::string user_id;
    Kind kind = Kind::unavailable;
    std::string reason;
};

struct PollResult {
    std::vector<ChannelSnapshot> snapshots;  // input order, answered users only
    std::vector<PollFailure> failures;       // input order
};

struct PollOptions {
    int max_in_flight = 4;
    int max_retries = 3;  // backoff 1s, 2s, 4s between attempts
    RateLimiter* limiter = nullptr;
};

// Polls every user once. Timestamps are floored to the 30-minute grid slot at
// fetch time; transport failures are retried with exponential backoff, then
// reported. Nothing is ever fabricated for a user the source did not answer.
PollResult poll_once(TelemetrySource& source, std::span<const std::string> user_ids, Clock& clock,
                     const PollOptions& options = {});

struct CollectorConfig {
    int cohort_size = 4000;
    std::int64_t poll_interval_seconds = kSecondsPerSlot;
    int weeks = 4;
    int max_in_flight = 8;
    int rate_limit_per_minute = 0;  // 0 = unlimited

    void validate(std::size_t population_size) const;
};

class SnapshotSink {
public:
    virtual ~SnapshotSink() = default;
    virtual void append(const ChannelSnapshot& snap) = 0;  // throws on write failure
};

class JsonlSink : public SnapshotSink {
public:
    explicit JsonlSink(const std::filesystem::path& path);
    void append(const ChannelSnapshot& snap) override;

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

class MemorySink : public SnapshotSink {
public:
    void append(const ChannelSnapshot& snap) override { snapshots.push_back(snap); }
    std::vector<ChannelSnapshot> snapshots;
};

struct CollectionSummary {
    std::size_t snapshots_written = 0;
    std::size_t failed_polls = 0;  // (user, slot) pairs with no snapshot
    std::size_t slots_polled = 0;
    Timestamp started_ts = 0;
    Timestamp finished_ts = 0;
    bool aborted = false;
    std::string abort_reason;
    std::vector<PollFailure> failures;
};

// Rotating collection: the population is split into `weeks` disjoint cohorts
// of `cohort_size`; cohort w is polled every interval for exactly week w.
// Snapshots are appended to the sink in arrival order. A sink write failure
// aborts with the progress so far; poll failures are recorded as gaps.
CollectionSummary run_collection(const CollectorConfig& config, TelemetrySource& source,
                                 SnapshotSink& sink, std::span<const std::string> population,
                                 Clock& clock);

}  // namespace channelscope::ingest
