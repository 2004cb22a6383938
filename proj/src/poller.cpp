#include "channelscope/poller.hpp"

#include <atomic>
#include <optional>
#include <thread>

#include "channelscope/errors.hpp"

namespace channelscope::ingest {

namespace {

ChannelSnapshot make_snapshot(const std::string& user_id, Timestamp slot_ts, ChannelState state) {
    ChannelSnapshot snap;
    snap.ts = slot_ts;
    snap.user_id = user_id;
    snap.live = state.live;
    snap.followers = state.followers;
    snap.language = std::move(state.language);
    snap.tags = std::move(state.tags);
    if (state.live) {
        snap.stream_id = std::move(state.stream_id);
        snap.viewers = state.viewers;
        snap.game_id = std::move(state.game_id);
        snap.game_name = std::move(state.game_name);
    }
    return snap;
}

}  // namespace

PollResult poll_once(TelemetrySource& source, std::span<const std::string> user_ids, Clock& clock,
                     const PollOptions& options) {
    if (user_ids.empty()) throw ValidationError("poll_once requires at least one user id");

    const std::size_t n = user_ids.size();
    std::vector<std::optional<ChannelSnapshot>> snaps(n);
    std::vector<std::optional<PollFailure>> fails(n);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            const std::string& user = user_ids[i];
            if (options.limiter) options.limiter->acquire();
            int attempt = 0;
            for (;;) {
                try {
                    auto state = source.fetch(user);
                    if (state) {
                        snaps[i] = make_snapshot(user, floor_to_slot(clock.now()), std::move(*state));
                    } else {
                        fails[i] = PollFailure{user, PollFailure::Kind::no_answer, "no answer"};
                    }
                    break;
                } catch (const MalformedPayload& e) {
                    fails[i] = PollFailure{user, PollFailure::Kind::malformed, e.what()};
                    break;
                } catch (const SourceUnavailable& e) {
                    if (attempt >= options.max_retries) {
                        fails[i] = PollFailure{user, PollFailure::Kind::unavailable, e.what()};
                        break;
                    }
                    clock.sleep_until(clock.now() + (std::int64_t{1} << attempt));
                    ++attempt;
                    if (options.limiter) options.limiter->acquire();
                }
            }
        }
    };

    int threads = std::max(1, std::min<int>(options.max_in_flight, static_cast<int>(n)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    PollResult result;
    result.snapshots.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (snaps[i]) result.snapshots.push_back(std::move(*snaps[i]));
        if (fails[i]) result.failures.push_back(std::move(*fails[i]));
    }
    return result;
}

void CollectorConfig::validate(std::size_t population_size) const {
    if (cohort_size <= 0) throw ValidationError("cohort_size must be positive");
    if (weeks <= 0) throw ValidationError("weeks must be positive");
    if (poll_interval_seconds <= 0 || 86400 % poll_interval_seconds != 0) {
        throw ValidationError("poll_interval must divide 24h evenly");
    }
    if (max_in_flight <= 0) throw ValidationError("max_in_flight must be positive");
    if (rate_limit_per_minute < 0) throw ValidationError("rate_limit must be non-negative");
    if (static_cast<std::size_t>(cohort_size) * static_cast<std::size_t>(weeks) > population_size) {
        throw ValidationError("population smaller than cohort_size x weeks");
    }
}

JsonlSink::JsonlSink(const std::filesystem::path& path) : out_(path), path_(path) {
    if (!out_) throw std::runtime_error("cannot open sink: " + path.string());
}

void JsonlSink::append(const ChannelSnapshot& snap) {
    out_ << to_jsonl_line(snap) << '\n';
    if (!out_) throw std::runtime_error("sink write failed: " + path_.string());
}

CollectionSummary run_collection(const CollectorConfig& config, TelemetrySource& source,
                                 SnapshotSink& sink, std::span<const std::string> population,
                                 Clock& clock) {
    config.validate(population.size());

    CollectionSummary summary;
    summary.started_ts = clock.now();

    const std::int64_t interval = config.poll_interval_seconds;
    const std::int64_t slots_per_week = 7 * 86400 / interval;
    const Timestamp first_slot = floor_to_slot(clock.now(), interval) + interval;

    RateLimiter limiter(config.rate_limit_per_minute > 0 ? config.rate_limit_per_minute : 1, clock);
    PollOptions options;
    options.max_in_flight = config.max_in_flight;
    options.limiter = config.rate_limit_per_minute > 0 ? &limiter : nullptr;

    for (int week = 0; week < config.weeks; ++week) {
        auto cohort = population.subspan(static_cast<std::size_t>(week) * config.cohort_size,
                                         config.cohort_size);
        for (std::int64_t slot = 0; slot < slots_per_week; ++slot) {
            clock.sleep_until(first_slot + (week * slots_per_week + slot) * interval);
            PollResult result = poll_once(source, cohort, clock, options);
            summary.failed_polls += result.failures.size();
            for (auto& f : result.failures) summary.failures.push_back(std::move(f));
            try {
                for (const auto& snap : result.snapshots) {
                    sink.append(snap);
                    ++summary.snapshots_written;
                }
            } catch (const std::exception& e) {
                summary.aborted = true;
                summary.abort_reason = e.what();
                summary.finished_ts = clock.now();
                return summary;
            }
            ++summary.slots_polled;
        }
    }
    summary.finished_ts = clock.now();
    return summary;
}

}  // namespace channelscope::ingest
