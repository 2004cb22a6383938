#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "channelscope/time.hpp"

namespace channelscope::ingest {

// One 30-minute observation of one channel. When `live` is false the
// stream-scoped fields are absent.
struct ChannelSnapshot {
    Timestamp ts = 0;
    std::string user_id;
    bool live = false;
    std::int64_t followers = 0;
    std::optional<std::string> stream_id;
    std::optional<std::int64_t> viewers;
    std::optional<std::string> game_id;
    std::optional<std::string> game_name;
    std::string language;
    std::vector<std::string> tags;

    bool operator==(const ChannelSnapshot&) const = default;
};

struct GamePopularityRecord {
    Timestamp date = 0;  // midnight UTC of the day
    std::string game_id;
    int rank = 1;  // 1 = most popular that day
    std::int64_t viewers = 0;
};

struct ChannelProfile {
    std::string user_id;
    std::int64_t initial_followers = 0;
    std::int64_t video_count = 0;
    std::int64_t clip_count = 0;
};

// Snapshots per user, sorted by timestamp, deduplicated on (user_id, ts)
// with last-write-wins. Immutable once loaded; safe to share across threads.
class SnapshotStore {
public:
    void insert(ChannelSnapshot snap);
    void finalize();  // sort + dedup; called by loaders

    const std::map<std::string, std::vector<ChannelSnapshot>>& by_user() const { return users_; }
    const std::vector<ChannelSnapshot>* find(const std::string& user_id) const;
    std::size_t user_count() const { return users_.size(); }
    std::size_t snapshot_count() const;
    bool empty() const { return users_.empty(); }

    bool operator==(const SnapshotStore&) const = default;

private:
    std::map<std::string, std::vector<ChannelSnapshot>> users_;
};

struct ReplayStats {
    std::size_t lines = 0;
    std::size_t parsed = 0;
    std::size_t skipped = 0;
    std::vector<std::string> skip_reasons;  // first few, for diagnostics
};

// JSONL codec. Keys: ts, user_id, live, followers, stream_id, viewers,
// game_id, game_name, language, tags; absent optionals are null.
std::string to_jsonl_line(const ChannelSnapshot& snap);
std::optional<ChannelSnapshot> parse_snapshot_line(const std::string& line, std::string* error = nullptr);

// Loads a line-delimited JSON snapshot log. Unparseable lines are skipped and
// counted; a log with zero valid lines is an error.
SnapshotStore replay_load(const std::filesystem::path& path, ReplayStats* stats = nullptr);
SnapshotStore store_from_snapshots(std::vector<ChannelSnapshot> snaps);
void write_snapshot_log(const SnapshotStore& store, const std::filesystem::path& path);

// Game popularity: CSV with header date,game_id,rank,viewers. Ranks within a
// day must be unique and contiguous from 1.
std::vector<GamePopularityRecord> load_game_popularity(const std::filesystem::path& path);
void write_game_popularity(const std::vector<GamePopularityRecord>& records,
                           const std::filesystem::path& path);

// Games ranked in the daily top k on at least one day.
std::set<std::string> top_popular_games(const std::vector<GamePopularityRecord>& records, int k = 20);

// Profiles: CSV with header user_id,initial_followers,video_count,clip_count.
std::vector<ChannelProfile> load_profiles(const std::filesystem::path& path);
void write_profiles(const std::vector<ChannelProfile>& profiles, const std::filesystem::path& path);

// Builds profiles from a store: initial_followers is the earliest snapshot's
// follower count; video/clip counts default to zero.
std::vector<ChannelProfile> derive_profiles(const SnapshotStore& store);

// Language codes are lowercase throughout.
std::string lowercase_language(std::string code);

}  // namespace channelscope::ingest
