#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "channelscope/ingest.hpp"

namespace channelscope::sessions {

using ingest::ChannelProfile;
using ingest::ChannelSnapshot;

// A contiguous live period reconstructed from the 30-minute grid. end_ts is
// exclusive: the end of the last observed live slot.
struct StreamSession {
    std::string user_id;
    std::string stream_id;
    Timestamp start_ts = 0;
    Timestamp end_ts = 0;
    double duration_hours = 0.0;
    double avg_viewers = 0.0;
    std::int64_t start_viewers = 0;
    std::int64_t followers_gained = 0;
    std::vector<std::string> games;  // distinct, first-seen order
    std::vector<std::string> tags;   // distinct, first-seen order
    std::string language;

    bool covers(Timestamp ts) const { return ts >= start_ts && ts < end_ts; }
};

struct GainDelta {
    Timestamp ts = 0;  // start of the 30-minute timeframe the gain accrued in
    std::int64_t followers_delta = 0;
    bool active = false;
};

struct GainSeries {
    std::string user_id;
    std::vector<GainDelta> deltas;
};

struct ChannelWeekStats {
    std::string user_id;
    std::int64_t initial_followers = 0;
    int streams_per_week = 0;
    double hours_per_week = 0.0;
    std::int64_t followers_gained_total = 0;
    std::int64_t followers_gained_active = 0;
    std::int64_t followers_gained_inactive = 0;
    int n_streams_lt5h = 0;
    int n_streams_5to10h = 0;
    int n_streams_gt10h = 0;
    bool has_gaming = false;
    bool has_non_gaming = false;
    bool played_popular_game = false;
    std::string language;  // mode over sessions, ties lexicographic

    bool operator==(const ChannelWeekStats&) const = default;
};

// Follower values on the dense grid [first ts, last ts], missing slots
// forward-filled from the previous observation.
struct FollowerSeries {
    Timestamp start_ts = 0;
    std::vector<std::int64_t> followers;
};
FollowerSeries forward_filled_followers(std::span<const ChannelSnapshot> snapshots);

// The category names treated as non-gaming content; overridable everywhere
// they are consumed.
const std::set<std::string>& default_non_gaming_tags();

// Maximal runs of live snapshots sharing a stream_id become sessions. One
// missing grid slot inside a run is bridged; two or more, an observed offline
// snapshot, or a stream_id change ends the session. Input order is irrelevant
// (re-sorted internally).
std::vector<StreamSession> build_sessions(std::span<const ChannelSnapshot> snapshots);

// Consecutive-grid follower differences; a delta is active when the slot the
// gain materialized in (ts + 30min) lies inside a session.
GainSeries gain_series(std::span<const ChannelSnapshot> snapshots,
                       std::span<const StreamSession> sessions);

ChannelWeekStats week_stats(const ChannelProfile& profile,
                            std::span<const StreamSession> sessions, const GainSeries& gains,
                            const std::set<std::string>& popular_games,
                            const std::set<std::string>& non_gaming_tags = default_non_gaming_tags());

void write_sessions_csv(std::span<const StreamSession> sessions, const std::filesystem::path& path);

}  // namespace channelscope::sessions
