#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "channelscope/sessions.hpp"

namespace channelscope::cohort {

using sessions::ChannelWeekStats;
using sessions::GainSeries;
using sessions::StreamSession;

inline constexpr std::int64_t kBucketWidth = 1000;
inline constexpr int kBucketCount = 20;
inline constexpr std::int64_t kMaxBucketable = kBucketWidth * kBucketCount;  // exclusive

enum class Category { small, medium, big, mega };

const char* category_name(Category c);

// Half-open ranges on initial followers:
// small [0,5000), medium [5000,10000), big [10000,100000), mega [100000,inf).
Category categorize(std::int64_t initial_followers);

struct Bucket {
    int index = 0;  // [0, 20)
    std::int64_t lo = 0;
    std::int64_t hi = 0;  // exclusive
};

// floor(f / 1000) for f in [0, 20000); out of range is the caller's error.
Bucket bucketize(std::int64_t initial_followers);

struct GrowthLabel {
    int cls = 0;  // 1 = good, 0 = average, -1 = bad
    double bucket_avg = 0.0;
};

struct BucketAverages {
    std::array<double, kBucketCount> avg{};
    std::array<std::int64_t, kBucketCount> count{};
};

BucketAverages bucket_gain_averages(std::span<const ChannelWeekStats> channels);

// Net loss is bad regardless of the average; strictly above the bucket
// average is good; everything else is average. Averages are computed from
// the input when not supplied.
std::vector<GrowthLabel> label_growth(std::span<const ChannelWeekStats> channels,
                                      const std::optional<BucketAverages>& averages = std::nullopt);

// Per bucket, the ceil(top_fraction * n) channels with the highest total
// gain; ties broken by user_id ascending. Returns user_ids, sorted.
std::vector<std::string> isolate_outliers(std::span<const ChannelWeekStats> channels,
                                          double top_fraction = 0.05);

// Per-channel computed bundle the cohort analyses consume.
struct ChannelActivity {
    ChannelWeekStats stats;
    std::vector<StreamSession> sessions;
    GainSeries gains;
};

struct HourProfile {
    std::array<double, 48> mean_gain{};       // per half-hour UTC bin
    std::array<std::int64_t, 48> samples{};   // active deltas contributing
    std::vector<int> peak_bins;               // mean strictly above the p90 of bin means
};

// Mean active-period follower gain per half-hour UTC bin over all sessions in
// the given language. nullopt when the language has no active samples.
std::optional<HourProfile> peak_hours(std::span<const ChannelActivity> channels,
                                      const std::string& language);

struct ContentSplit {
    double gaming_pct = 0.0;
    double non_gaming_pct = 0.0;
    std::size_t n_streams = 0;
};

// A stream is non-gaming when its primary (first) tag is in the configured
// set; percentages sum to 100 for any non-empty input.
ContentSplit content_split(std::span<const StreamSession> streams,
                           const std::set<std::string>& non_gaming_tags);

struct StrategyCriteria {
    int min_streams_per_week = 5;
    double max_stream_hours = 5.0;
    bool require_mixed_content = true;
    std::optional<double> min_hours_per_week;  // off by default

    void validate() const;
};

struct StrategyInput {
    ChannelWeekStats stats;
    double max_session_hours = 0.0;
    double viewer_hours = 0.0;  // sum of avg_viewers x duration over sessions
};

StrategyInput make_strategy_input(const ChannelWeekStats& stats,
                                  std::span<const StreamSession> sessions);

struct GroupStats {
    std::size_t n = 0;
    double mean_gain = 0.0;
    double median_gain = 0.0;
    double viewers_per_hour = 0.0;  // total viewer-hours / total hours
};

struct StrategyComparison {
    GroupStats all;
    std::optional<GroupStats> matching;  // absent when no channel matches
};

bool matches_strategy(const StrategyInput& channel, const StrategyCriteria& criteria);
StrategyComparison compare_strategy(std::span<const StrategyInput> channels,
                                    const StrategyCriteria& criteria);

// CSV exports mirroring the analysis tables.
void write_categories_csv(std::span<const ingest::ChannelProfile> profiles,
                          const std::filesystem::path& path);
void write_bucket_averages_csv(const BucketAverages& averages, const std::filesystem::path& path);
void write_labels_csv(std::span<const ChannelWeekStats> channels,
                      std::span<const GrowthLabel> labels, const std::filesystem::path& path);
void write_outliers_csv(std::span<const ChannelWeekStats> channels,
                        std::span<const std::string> outlier_ids,
                        const std::filesystem::path& path);
void write_content_split_csv(const ContentSplit& all, const ContentSplit& outliers,
                             const std::filesystem::path& path);
void write_strategy_csv(const StrategyComparison& cmp, const std::filesystem::path& path);
void write_peak_hours_csv(const HourProfile& profile, const std::filesystem::path& path);

}  // namespace channelscope::cohort
