#include "channelscope/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "channelscope/csv.hpp"
#include "channelscope/errors.hpp"

namespace channelscope::cohort {

const char* category_name(Category c) {
    switch (c) {
        case Category::small: return "small";
        case Category::medium: return "medium";
        case Category::big: return "big";
        case Category::mega: return "mega";
    }
    return "?";
}

Category categorize(std::int64_t initial_followers) {
    if (initial_followers < 0) throw ValidationError("followers must be non-negative");
    if (initial_followers < 5000) return Category::small;
    if (initial_followers < 10000) return Category::medium;
    if (initial_followers < 100000) return Category::big;
    return Category::mega;
}

Bucket bucketize(std::int64_t initial_followers) {
    if (initial_followers < 0 || initial_followers >= kMaxBucketable) {
        throw ValidationError("followers out of bucket range [0, 20000): " +
                              std::to_string(initial_followers));
    }
    Bucket b;
    b.index = static_cast<int>(initial_followers / kBucketWidth);
    b.lo = b.index * kBucketWidth;
    b.hi = b.lo + kBucketWidth;
    return b;
}

BucketAverages bucket_gain_averages(std::span<const ChannelWeekStats> channels) {
    BucketAverages averages;
    std::array<double, kBucketCount> sum{};
    for (const ChannelWeekStats& ch : channels) {
        int idx = bucketize(ch.initial_followers).index;
        sum[static_cast<std::size_t>(idx)] += static_cast<double>(ch.followers_gained_total);
        ++averages.count[static_cast<std::size_t>(idx)];
    }
    for (std::size_t i = 0; i < kBucketCount; ++i) {
        if (averages.count[i] > 0) averages.avg[i] = sum[i] / static_cast<double>(averages.count[i]);
    }
    return averages;
}

std::vector<GrowthLabel> label_growth(std::span<const ChannelWeekStats> channels,
                                      const std::optional<BucketAverages>& averages) {
    const BucketAverages avgs = averages ? *averages : bucket_gain_averages(channels);
    std::vector<GrowthLabel> labels;
    labels.reserve(channels.size());
    for (const ChannelWeekStats& ch : channels) {
        GrowthLabel label;
        label.bucket_avg = avgs.avg[static_cast<std::size_t>(bucketize(ch.initial_followers).index)];
        if (ch.followers_gained_total < 0) {
            label.cls = -1;
        } else if (static_cast<double>(ch.followers_gained_total) > label.bucket_avg) {
            label.cls = 1;
        } else {
            label.cls = 0;
        }
        labels.push_back(label);
    }
    return labels;
}

std::vector<std::string> isolate_outliers(std::span<const ChannelWeekStats> channels,
                                          double top_fraction) {
    if (!(top_fraction > 0.0) || top_fraction > 1.0) {
        throw ValidationError("top_fraction must be in (0, 1]");
    }
    std::array<std::vector<const ChannelWeekStats*>, kBucketCount> buckets;
    for (const ChannelWeekStats& ch : channels) {
        buckets[static_cast<std::size_t>(bucketize(ch.initial_followers).index)].push_back(&ch);
    }
    std::vector<std::string> outliers;
    for (auto& bucket : buckets) {
        if (bucket.empty()) continue;
        std::sort(bucket.begin(), bucket.end(),
                  [](const ChannelWeekStats* a, const ChannelWeekStats* b) {
                      if (a->followers_gained_total != b->followers_gained_total) {
                          return a->followers_gained_total > b->followers_gained_total;
                      }
                      return a->user_id < b->user_id;
                  });
        auto take = static_cast<std::size_t>(
            std::ceil(top_fraction * static_cast<double>(bucket.size())));
        for (std::size_t i = 0; i < take && i < bucket.size(); ++i) {
            outliers.push_back(bucket[i]->user_id);
        }
    }
    std::sort(outliers.begin(), outliers.end());
    return outliers;
}

std::optional<HourProfile> peak_hours(std::span<const ChannelActivity> channels,
                                      const std::string& language) {
    HourProfile profile;
    std::array<double, 48> sum{};
    std::int64_t total = 0;
    for (const ChannelActivity& ch : channels) {
        for (const sessions::GainDelta& d : ch.gains.deltas) {
            if (!d.active) continue;
            Timestamp landing = d.ts + kSecondsPerSlot;
            auto session = std::find_if(ch.sessions.begin(), ch.sessions.end(),
                                        [&](const StreamSession& s) { return s.covers(landing); });
            if (session == ch.sessions.end() || session->language != language) continue;
            auto bin = static_cast<std::size_t>(utc_slot_of_day(d.ts));
            sum[bin] += static_cast<double>(d.followers_delta);
            ++profile.samples[bin];
            ++total;
        }
    }
    if (total == 0) return std::nullopt;
    for (std::size_t b = 0; b < 48; ++b) {
        if (profile.samples[b] > 0) profile.mean_gain[b] = sum[b] / static_cast<double>(profile.samples[b]);
    }
    // Peaks: bins whose mean strictly exceeds the 90th percentile of the 48
    // bin means (nearest-rank).
    std::array<double, 48> sorted = profile.mean_gain;
    std::sort(sorted.begin(), sorted.end());
    double p90 = sorted[static_cast<std::size_t>(std::ceil(0.9 * 48.0)) - 1];
    for (int b = 0; b < 48; ++b) {
        if (profile.mean_gain[static_cast<std::size_t>(b)] > p90) profile.peak_bins.push_back(b);
    }
    return profile;
}

ContentSplit content_split(std::span<const StreamSession> streams,
                           const std::set<std::string>& non_gaming_tags) {
    if (non_gaming_tags.empty()) throw ValidationError("non-gaming tag set must not be empty");
    ContentSplit split;
    split.n_streams = streams.size();
    if (streams.empty()) return split;
    std::size_t non_gaming = 0;
    for (const StreamSession& s : streams) {
        if (!s.tags.empty() && non_gaming_tags.count(s.tags.front())) ++non_gaming;
    }
    split.non_gaming_pct = 100.0 * static_cast<double>(non_gaming) / static_cast<double>(streams.size());
    split.gaming_pct = 100.0 - split.non_gaming_pct;
    return split;
}

void StrategyCriteria::validate() const {
    if (min_streams_per_week < 0 || max_stream_hours < 0.0 ||
        (min_hours_per_week && *min_hours_per_week < 0.0)) {
        throw ValidationError("strategy thresholds must be non-negative");
    }
}

StrategyInput make_strategy_input(const ChannelWeekStats& stats,
                                  std::span<const StreamSession> sessions) {
    StrategyInput input;
    input.stats = stats;
    for (const StreamSession& s : sessions) {
        input.max_session_hours = std::max(input.max_session_hours, s.duration_hours);
        input.viewer_hours += s.avg_viewers * s.duration_hours;
    }
    return input;
}

bool matches_strategy(const StrategyInput& channel, const StrategyCriteria& criteria) {
    const ChannelWeekStats& stats = channel.stats;
    if (stats.streams_per_week < criteria.min_streams_per_week) return false;
    if (channel.max_session_hours > criteria.max_stream_hours) return false;
    if (criteria.require_mixed_content && !(stats.has_gaming && stats.has_non_gaming)) return false;
    if (criteria.min_hours_per_week && stats.hours_per_week < *criteria.min_hours_per_week) {
        return false;
    }
    return true;
}

namespace {

GroupStats group_stats(const std::vector<const StrategyInput*>& group) {
    GroupStats stats;
    stats.n = group.size();
    if (group.empty()) return stats;
    std::vector<double> gains;
    gains.reserve(group.size());
    double gain_sum = 0.0, viewer_hours = 0.0, hours = 0.0;
    for (const StrategyInput* ch : group) {
        double g = static_cast<double>(ch->stats.followers_gained_total);
        gains.push_back(g);
        gain_sum += g;
        viewer_hours += ch->viewer_hours;
        hours += ch->stats.hours_per_week;
    }
    stats.mean_gain = gain_sum / static_cast<double>(group.size());
    std::sort(gains.begin(), gains.end());
    std::size_t mid = gains.size() / 2;
    stats.median_gain = gains.size() % 2 ? gains[mid] : (gains[mid - 1] + gains[mid]) / 2.0;
    stats.viewers_per_hour = hours > 0.0 ? viewer_hours / hours : 0.0;
    return stats;
}

}  // namespace

StrategyComparison compare_strategy(std::span<const StrategyInput> channels,
                                    const StrategyCriteria& criteria) {
    criteria.validate();
    std::vector<const StrategyInput*> all, matching;
    for (const StrategyInput& ch : channels) {
        all.push_back(&ch);
        if (matches_strategy(ch, criteria)) matching.push_back(&ch);
    }
    StrategyComparison cmp;
    cmp.all = group_stats(all);
    if (!matching.empty()) cmp.matching = group_stats(matching);
    return cmp;
}

void write_categories_csv(std::span<const ingest::ChannelProfile> profiles,
                          const std::filesystem::path& path) {
    std::array<std::int64_t, 4> counts{};
    for (const auto& p : profiles) {
        counts[static_cast<std::size_t>(categorize(p.initial_followers))]++;
    }
    CsvWriter csv(path, {"category", "followers_lo", "followers_hi", "n_users"});
    const std::array<std::pair<std::int64_t, std::int64_t>, 4> ranges{
        {{0, 5000}, {5000, 10000}, {10000, 100000}, {100000, -1}}};
    for (std::size_t i = 0; i < 4; ++i) {
        csv.write_row({category_name(static_cast<Category>(i)), CsvWriter::cell(ranges[i].first),
                       ranges[i].second < 0 ? std::string() : CsvWriter::cell(ranges[i].second),
                       CsvWriter::cell(counts[i])});
    }
}

void write_bucket_averages_csv(const BucketAverages& averages, const std::filesystem::path& path) {
    CsvWriter csv(path, {"followers_lo", "followers_hi", "n_users", "avg_followers_gained"});
    for (int b = 0; b < kBucketCount; ++b) {
        auto i = static_cast<std::size_t>(b);
        csv.write_row({CsvWriter::cell(b * kBucketWidth), CsvWriter::cell((b + 1) * kBucketWidth),
                       CsvWriter::cell(averages.count[i]), CsvWriter::cell(averages.avg[i])});
    }
}

void write_labels_csv(std::span<const ChannelWeekStats> channels,
                      std::span<const GrowthLabel> labels, const std::filesystem::path& path) {
    CsvWriter csv(path, {"user_id", "bucket", "followers_gained", "bucket_avg", "label"});
    for (std::size_t i = 0; i < channels.size(); ++i) {
        csv.write_row({CsvWriter::cell(channels[i].user_id),
                       CsvWriter::cell(static_cast<std::int64_t>(
                           bucketize(channels[i].initial_followers).index)),
                       CsvWriter::cell(channels[i].followers_gained_total),
                       CsvWriter::cell(labels[i].bucket_avg),
                       CsvWriter::cell(static_cast<std::int64_t>(labels[i].cls))});
    }
}

void write_outliers_csv(std::span<const ChannelWeekStats> channels,
                        std::span<const std::string> outlier_ids,
                        const std::filesystem::path& path) {
    CsvWriter csv(path, {"user_id", "bucket", "followers_gained"});
    for (const std::string& id : outlier_ids) {
        auto it = std::find_if(channels.begin(), channels.end(),
                               [&](const ChannelWeekStats& ch) { return ch.user_id == id; });
        if (it == channels.end()) continue;
        csv.write_row({CsvWriter::cell(id),
                       CsvWriter::cell(static_cast<std::int64_t>(bucketize(it->initial_followers).index)),
                       CsvWriter::cell(it->followers_gained_total)});
    }
}

void write_content_split_csv(const ContentSplit& all, const ContentSplit& outliers,
                             const std::filesystem::path& path) {
    CsvWriter csv(path, {"content", "entire_dataset_pct", "outliers_pct"});
    csv.write_row({"gaming", CsvWriter::cell(all.gaming_pct), CsvWriter::cell(outliers.gaming_pct)});
    csv.write_row({"non_gaming", CsvWriter::cell(all.non_gaming_pct),
                   CsvWriter::cell(outliers.non_gaming_pct)});
}

void write_strategy_csv(const StrategyComparison& cmp, const std::filesystem::path& path) {
    CsvWriter csv(path, {"metric", "entire_dataset", "strategy_matching"});
    auto opt = [&](auto get) -> std::string {
        return cmp.matching ? CsvWriter::cell(get(*cmp.matching)) : std::string();
    };
    csv.write_row({"n_channels", CsvWriter::cell(static_cast<std::int64_t>(cmp.all.n)),
                   cmp.matching ? CsvWriter::cell(static_cast<std::int64_t>(cmp.matching->n))
                                : std::string("0")});
    csv.write_row({"avg_followers_gained", CsvWriter::cell(cmp.all.mean_gain),
                   opt([](const GroupStats& g) { return g.mean_gain; })});
    csv.write_row({"median_followers_gained", CsvWriter::cell(cmp.all.median_gain),
                   opt([](const GroupStats& g) { return g.median_gain; })});
    csv.write_row({"avg_viewers_per_hour", CsvWriter::cell(cmp.all.viewers_per_hour),
                   opt([](const GroupStats& g) { return g.viewers_per_hour; })});
}

void write_peak_hours_csv(const HourProfile& profile, const std::filesystem::path& path) {
    CsvWriter csv(path, {"bin", "utc_start", "mean_gain", "is_peak"});
    for (int b = 0; b < 48; ++b) {
        char clock[8];
        std::snprintf(clock, sizeof(clock), "%02d:%02d", b / 2, (b % 2) * 30);
        bool is_peak = std::find(profile.peak_bins.begin(), profile.peak_bins.end(), b) !=
                       profile.peak_bins.end();
        csv.write_row({CsvWriter::cell(static_cast<std::int64_t>(b)), clock,
                       CsvWriter::cell(profile.mean_gain[static_cast<std::size_t>(b)]),
                       is_peak ? "1" : "0"});
    }
}

}  // namespace channelscope::cohort
