#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "channelscope/ingest.hpp"
#include "channelscope/sessions.hpp"

namespace channelscope::synth {

// Synthetic population generator. Follower counts are inverse-transform
// power-law draws; behavior (schedules, content, per-slot gains and viewers)
// is realized up front so the emitted snapshot grid matches the retained
// ground truth exactly.
struct SynthConfig {
    int n_channels = 1000;
    double follower_alpha = 1.25;
    double follower_xmin = 10.0;
    int weeks = 1;
    std::vector<std::pair<std::string, double>> language_mix{{"en", 0.7}, {"es", 0.3}};
    double bot_rate = 0.0;
    double bot_magnitude_ratio = 200.0;
    std::uint64_t seed = 1;

    // Behavior model knobs.
    int max_streams_per_week = 8;
    double bad_channel_rate = 0.05;   // channels that only lose followers
    double strategist_rate = 0.10;    // frequent short mixed-content streamers, 3x gain
    double non_gaming_rate = 0.30;    // per-stream chance of a non-gaming category
    int n_games = 40;
    int popular_top_k = 20;
    Timestamp start_ts = 1625097600;  // 2021-07-01T00:00:00Z

    void validate() const;
};

struct TruthSession {
    std::string stream_id;
    int start_slot = 0;       // within the channel's observed week, [1, 336)
    int duration_slots = 0;   // >= 2
    std::string game_id;
    std::string game_name;
    std::string tag;
    Timestamp start_ts = 0;
    Timestamp end_ts = 0;
    std::vector<std::int64_t> viewers;  // realized, one per in-session slot
    std::int64_t start_viewers = 0;
    double avg_viewers = 0.0;
    std::int64_t followers_gained = 0;
};

struct ChannelTruth {
    ingest::ChannelProfile profile;
    int week = 0;  // which observation week this channel belongs to
    std::string language;
    bool bad = false;
    bool strategist = false;
    std::vector<std::int64_t> deltas;  // realized follower deltas, one per grid step
    std::vector<TruthSession> sessions;
    sessions::ChannelWeekStats week_stats;
};

struct Population {
    SynthConfig config;
    std::vector<ChannelTruth> channels;
    std::vector<ingest::GamePopularityRecord> game_popularity;
    std::set<std::string> popular_games;
};

Population generate_population(const SynthConfig& config);

// Expands the realized ground truth into a grid-aligned snapshot log in
// collection (slot-major) order.
std::vector<ingest::ChannelSnapshot> generate_snapshots(const Population& population);

struct InjectionResult {
    std::vector<ingest::ChannelSnapshot> log;
    std::vector<std::string> tainted_users;              // sorted
    std::map<std::string, std::size_t> injected_delta;   // user -> flagged delta index
    std::vector<std::string> skipped_users;              // too short to host a step
};

// Inserts one follower step per selected channel at an interior slot, sized
// bot_magnitude_ratio times the channel's largest pre-existing delta.
InjectionResult inject_bot_anomalies(const std::vector<ingest::ChannelSnapshot>& log,
                                     const SynthConfig& config);

}  // namespace channelscope::synth
