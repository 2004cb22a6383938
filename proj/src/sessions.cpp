#include "channelscope/sessions.hpp"

#include <algorithm>
#include <map>

#include "channelscope/csv.hpp"

namespace channelscope::sessions {

namespace {

std::vector<ChannelSnapshot> sorted_copy(std::span<const ChannelSnapshot> snapshots) {
    std::vector<ChannelSnapshot> sorted(snapshots.begin(), snapshots.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const ChannelSnapshot& a, const ChannelSnapshot& b) { return a.ts < b.ts; });
    return sorted;
}

void push_distinct(std::vector<std::string>& out, const std::string& value) {
    if (!value.empty() && std::find(out.begin(), out.end(), value) == out.end()) {
        out.push_back(value);
    }
}

}  // namespace

FollowerSeries forward_filled_followers(std::span<const ChannelSnapshot> snapshots) {
    FollowerSeries series;
    if (snapshots.empty()) return series;

    // Store data is already sorted; only re-sort the (ts, followers) pairs
    // when the input is not.
    std::vector<std::pair<Timestamp, std::int64_t>> points;
    points.reserve(snapshots.size());
    for (const ChannelSnapshot& s : snapshots) points.emplace_back(s.ts, s.followers);
    if (!std::is_sorted(points.begin(), points.end(),
                        [](const auto& a, const auto& b) { return a.first < b.first; })) {
        std::sort(points.begin(), points.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }

    series.start_ts = points.front().first;
    const std::int64_t n_slots = (points.back().first - points.front().first) / kSecondsPerSlot + 1;
    series.followers.reserve(static_cast<std::size_t>(n_slots));
    std::size_t next = 0;
    for (std::int64_t slot = 0; slot < n_slots; ++slot) {
        Timestamp ts = series.start_ts + slot * kSecondsPerSlot;
        std::int64_t value = series.followers.empty() ? points.front().second : series.followers.back();
        while (next < points.size() && points[next].first == ts) {
            value = points[next].second;
            ++next;
        }
        series.followers.push_back(value);
    }
    return series;
}

const std::set<std::string>& default_non_gaming_tags() {
    static const std::set<std::string> tags = {
        "Just Chatting", "Music",  "Art",    "ASMR",
        "IRL",           "Sports", "Travel & Outdoors", "Talk Shows & Podcasts",
    };
    return tags;
}

std::vector<StreamSession> build_sessions(std::span<const ChannelSnapshot> snapshots) {
    std::vector<StreamSession> sessions;
    if (snapshots.empty()) return sessions;
    std::vector<ChannelSnapshot> scratch;
    std::span<const ChannelSnapshot> sorted = snapshots;
    if (!std::is_sorted(snapshots.begin(), snapshots.end(),
                        [](const ChannelSnapshot& a, const ChannelSnapshot& b) {
                            return a.ts < b.ts;
                        })) {
        scratch = sorted_copy(snapshots);
        sorted = scratch;
    }
    auto filled = forward_filled_followers(sorted);

    struct Run {
        std::string stream_id;
        std::vector<const ChannelSnapshot*> snaps;
        Timestamp last_live_ts = 0;
    };
    Run run;

    auto close_run = [&] {
        if (run.snaps.empty()) return;
        StreamSession s;
        const ChannelSnapshot& first = *run.snaps.front();
        s.user_id = first.user_id;
        s.stream_id = run.stream_id;
        s.start_ts = first.ts;
        s.end_ts = run.last_live_ts + kSecondsPerSlot;
        s.duration_hours = static_cast<double>(s.end_ts - s.start_ts) / 3600.0;
        s.start_viewers = first.viewers.value_or(0);
        s.language = first.language;
        double viewer_sum = 0.0;
        std::size_t viewer_n = 0;
        for (const ChannelSnapshot* snap : run.snaps) {
            if (snap->viewers) {
                viewer_sum += static_cast<double>(*snap->viewers);
                ++viewer_n;
            }
            if (snap->game_id) push_distinct(s.games, *snap->game_id);
            for (const auto& t : snap->tags) push_distinct(s.tags, t);
        }
        s.avg_viewers = viewer_n ? viewer_sum / static_cast<double>(viewer_n) : 0.0;

        // Gain attribution: deltas whose landing slot lies inside the session,
        // i.e. F[last in-session slot] - F[slot before the session starts].
        auto slot_index = [&](Timestamp ts) {
            return static_cast<std::size_t>((ts - filled.start_ts) / kSecondsPerSlot);
        };
        std::size_t end_idx = slot_index(run.last_live_ts);
        std::size_t start_idx = slot_index(s.start_ts);
        std::size_t base_idx = start_idx > 0 ? start_idx - 1 : 0;
        s.followers_gained = filled.followers[end_idx] - filled.followers[base_idx];

        sessions.push_back(std::move(s));
        run = Run{};
    };

    for (const ChannelSnapshot& snap : sorted) {
        if (!snap.live) {
            close_run();
            continue;
        }
        std::string sid = snap.stream_id.value_or("");
        if (!run.snaps.empty()) {
            bool same_stream = sid == run.stream_id;
            bool bridgeable = snap.ts - run.last_live_ts <= 2 * kSecondsPerSlot;
            if (!same_stream || !bridgeable) close_run();
        }
        if (run.snaps.empty()) run.stream_id = sid;
        run.snaps.push_back(&snap);
        run.last_live_ts = snap.ts;
    }
    close_run();
    return sessions;
}

GainSeries gain_series(std::span<const ChannelSnapshot> snapshots,
                       std::span<const StreamSession> sessions) {
    GainSeries series;
    if (snapshots.empty()) return series;
    series.user_id = snapshots.front().user_id;
    if (snapshots.size() < 2) return series;

    auto filled = forward_filled_followers(snapshots);
    series.deltas.reserve(filled.followers.size() - 1);
    for (std::size_t j = 0; j + 1 < filled.followers.size(); ++j) {
        GainDelta d;
        d.ts = filled.start_ts + static_cast<std::int64_t>(j) * kSecondsPerSlot;
        d.followers_delta = filled.followers[j + 1] - filled.followers[j];
        Timestamp landing = d.ts + kSecondsPerSlot;
        d.active = std::any_of(sessions.begin(), sessions.end(),
                               [&](const StreamSession& s) { return s.covers(landing); });
        series.deltas.push_back(d);
    }
    return series;
}

ChannelWeekStats week_stats(const ChannelProfile& profile,
                            std::span<const StreamSession> sessions, const GainSeries& gains,
                            const std::set<std::string>& popular_games,
                            const std::set<std::string>& non_gaming_tags) {
    ChannelWeekStats stats;
    stats.user_id = profile.user_id;
    stats.initial_followers = profile.initial_followers;
    stats.streams_per_week = static_cast<int>(sessions.size());

    std::map<std::string, int> language_votes;
    for (const StreamSession& s : sessions) {
        stats.hours_per_week += s.duration_hours;
        if (s.duration_hours < 5.0) {
            ++stats.n_streams_lt5h;
        } else if (s.duration_hours < 10.0) {
            ++stats.n_streams_5to10h;
        } else {
            ++stats.n_streams_gt10h;
        }
        bool non_gaming = !s.tags.empty() && non_gaming_tags.count(s.tags.front()) > 0;
        (non_gaming ? stats.has_non_gaming : stats.has_gaming) = true;
        for (const auto& g : s.games) {
            if (popular_games.count(g)) stats.played_popular_game = true;
        }
        ++language_votes[s.language];
    }
    int best_votes = 0;
    for (const auto& [lang, votes] : language_votes) {
        if (votes > best_votes) {  // map order makes ties lexicographic
            best_votes = votes;
            stats.language = lang;
        }
    }
    for (const GainDelta& d : gains.deltas) {
        stats.followers_gained_total += d.followers_delta;
        (d.active ? stats.followers_gained_active : stats.followers_gained_inactive) +=
            d.followers_delta;
    }
    return stats;
}

void write_sessions_csv(std::span<const StreamSession> sessions, const std::filesystem::path& path) {
    CsvWriter csv(path, {"user_id", "stream_id", "start_ts", "end_ts", "duration_hours",
                         "avg_viewers", "start_viewers", "followers_gained", "language"});
    for (const StreamSession& s : sessions) {
        csv.write_row({CsvWriter::cell(s.user_id), CsvWriter::cell(s.stream_id),
                       to_iso8601(s.start_ts), to_iso8601(s.end_ts),
                       CsvWriter::cell(s.duration_hours), CsvWriter::cell(s.avg_viewers),
                       CsvWriter::cell(s.start_viewers), CsvWriter::cell(s.followers_gained),
                       CsvWriter::cell(s.language)});
    }
}

}  // namespace channelscope::sessions
