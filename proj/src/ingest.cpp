#include "channelscope/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

#include "channelscope/csv.hpp"
#include "channelscope/errors.hpp"

namespace channelscope::ingest {

using nlohmann::json;

void SnapshotStore::insert(ChannelSnapshot snap) {
    users_[snap.user_id].push_back(std::move(snap));
}

void SnapshotStore::finalize() {
    for (auto& [user, snaps] : users_) {
        // last-write-wins on (user_id, ts): stable sort keeps file order
        // within equal timestamps, then we keep the last of each run.
        std::stable_sort(snaps.begin(), snaps.end(),
                         [](const ChannelSnapshot& a, const ChannelSnapshot& b) { return a.ts < b.ts; });
        std::vector<ChannelSnapshot> dedup;
        dedup.reserve(snaps.size());
        for (auto& s : snaps) {
            if (!dedup.empty() && dedup.back().ts == s.ts) {
                dedup.back() = std::move(s);
            } else {
                dedup.push_back(std::move(s));
            }
        }
        snaps = std::move(dedup);
    }
}

const std::vector<ChannelSnapshot>* SnapshotStore::find(const std::string& user_id) const {
    auto it = users_.find(user_id);
    return it == users_.end() ? nullptr : &it->second;
}

std::size_t SnapshotStore::snapshot_count() const {
    std::size_t n = 0;
    for (const auto& [user, snaps] : users_) n += snaps.size();
    return n;
}

namespace {

json optional_string(const std::optional<std::string>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string lowercase_language(std::string code) {
    std::transform(code.begin(), code.end(), code.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return code;
}

std::string to_jsonl_line(const ChannelSnapshot& snap) {
    json j;
    j["ts"] = to_iso8601(snap.ts);
    j["user_id"] = snap.user_id;
    j["live"] = snap.live;
    j["followers"] = snap.followers;
    j["stream_id"] = optional_string(snap.stream_id);
    j["viewers"] = snap.viewers ? json(*snap.viewers) : json(nullptr);
    j["game_id"] = optional_string(snap.game_id);
    j["game_name"] = optional_string(snap.game_name);
    j["language"] = snap.language;
    j["tags"] = snap.tags;
    return j.dump();
}

std::optional<ChannelSnapshot> parse_snapshot_line(const std::string& line, std::string* error) {
    auto fail = [&](const std::string& why) -> std::optional<ChannelSnapshot> {
        if (error) *error = why;
        return std::nullopt;
    };
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return fail("not a JSON object");

    ChannelSnapshot snap;
    if (!j.contains("ts") || !j["ts"].is_string()) return fail("missing ts");
    auto ts = parse_iso8601(j["ts"].get<std::string>());
    if (!ts) return fail("bad ts format");
    snap.ts = floor_to_slot(*ts);

    if (!j.contains("user_id") || !j["user_id"].is_string()) return fail("missing user_id");
    snap.user_id = j["user_id"].get<std::string>();
    if (snap.user_id.empty()) return fail("empty user_id");

    if (!j.contains("live") || !j["live"].is_boolean()) return fail("missing live");
    snap.live = j["live"].get<bool>();

    if (!j.contains("followers") || !j["followers"].is_number_integer()) return fail("missing followers");
    snap.followers = j["followers"].get<std::int64_t>();
    if (snap.followers < 0) return fail("negative followers");

    auto get_opt_string = [&](const char* key, std::optional<std::string>& out) {
        if (j.contains(key) && j[key].is_string()) out = j[key].get<std::string>();
    };
    get_opt_string("stream_id", snap.stream_id);
    get_opt_string("game_id", snap.game_id);
    get_opt_string("game_name", snap.game_name);
    if (j.contains("viewers") && j["viewers"].is_number_integer()) {
        auto v = j["viewers"].get<std::int64_t>();
        if (v < 0) return fail("negative viewers");
        snap.viewers = v;
    }
    if (j.contains("language") && j["language"].is_string()) {
        snap.language = lowercase_language(j["language"].get<std::string>());
    }
    if (j.contains("tags") && j["tags"].is_array()) {
        for (const auto& t : j["tags"]) {
            if (t.is_string()) snap.tags.push_back(t.get<std::string>());
        }
    }
    if (!snap.live) {
        snap.stream_id.reset();
        snap.viewers.reset();
        snap.game_id.reset();
        snap.game_name.reset();
    }
    return snap;
}

SnapshotStore replay_load(const std::filesystem::path& path, ReplayStats* stats) {
    std::ifstream in(path);
    if (!in) throw MissingInputError("cannot open snapshot log: " + path.string());

    SnapshotStore store;
    ReplayStats local;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++local.lines;
        std::string err;
        if (auto snap = parse_snapshot_line(line, &err)) {
            store.insert(std::move(*snap));
            ++local.parsed;
        } else {
            ++local.skipped;
            if (local.skip_reasons.size() < 10) {
                local.skip_reasons.push_back("line " + std::to_string(local.lines) + ": " + err);
            }
        }
    }
    if (local.parsed == 0) {
        throw ValidationError("snapshot log has no valid lines: " + path.string());
    }
    store.finalize();
    if (stats) *stats = std::move(local);
    return store;
}

SnapshotStore store_from_snapshots(std::vector<ChannelSnapshot> snaps) {
    SnapshotStore store;
    for (auto& s : snaps) store.insert(std::move(s));
    store.finalize();
    return store;
}

void write_snapshot_log(const SnapshotStore& store, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    for (const auto& [user, snaps] : store.by_user()) {
        for (const auto& s : snaps) out << to_jsonl_line(s) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<GamePopularityRecord> load_game_popularity(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingInputError("cannot open game popularity file: " + path.string());
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"date", "game_id", "rank", "viewers"}) {
        throw ValidationError("game popularity file must start with header date,game_id,rank,viewers");
    }
    std::vector<GamePopularityRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 4) {
            throw ValidationError("game popularity line " + std::to_string(line_no) + ": expected 4 fields");
        }
        GamePopularityRecord rec;
        auto date = parse_iso_date(fields[0]);
        if (!date) throw ValidationError("game popularity line " + std::to_string(line_no) + ": bad date");
        rec.date = *date;
        rec.game_id = fields[1];
        try {
            rec.rank = std::stoi(fields[2]);
            rec.viewers = std::stoll(fields[3]);
        } catch (const std::exception&) {
            throw ValidationError("game popularity line " + std::to_string(line_no) + ": bad number");
        }
        if (rec.rank < 1 || rec.viewers < 0) {
            throw ValidationError("game popularity line " + std::to_string(line_no) + ": rank/viewers out of range");
        }
        records.push_back(std::move(rec));
    }
    // Ranks within one day must be unique and contiguous from 1.
    std::map<Timestamp, std::vector<int>> per_day;
    for (const auto& r : records) per_day[r.date].push_back(r.rank);
    for (auto& [day, ranks] : per_day) {
        std::sort(ranks.begin(), ranks.end());
        for (std::size_t i = 0; i < ranks.size(); ++i) {
            if (ranks[i] != static_cast<int>(i) + 1) {
                throw ValidationError("game popularity ranks for " + to_iso_date(day) +
                                      " are not contiguous from 1");
            }
        }
    }
    return records;
}

void write_game_popularity(const std::vector<GamePopularityRecord>& records,
                           const std::filesystem::path& path) {
    CsvWriter csv(path, {"date", "game_id", "rank", "viewers"});
    for (const auto& r : records) {
        csv.write_row({to_iso_date(r.date), CsvWriter::cell(r.game_id),
                       CsvWriter::cell(static_cast<std::int64_t>(r.rank)), CsvWriter::cell(r.viewers)});
    }
}

std::set<std::string> top_popular_games(const std::vector<GamePopularityRecord>& records, int k) {
    std::set<std::string> popular;
    for (const auto& r : records) {
        if (r.rank <= k) popular.insert(r.game_id);
    }
    return popular;
}

std::vector<ChannelProfile> load_profiles(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingInputError("cannot open profiles file: " + path.string());
    std::string line;
    if (!std::getline(in, line) ||
        split_csv_line(line) != std::vector<std::string>{"user_id", "initial_followers", "video_count", "clip_count"}) {
        throw ValidationError("profiles file must start with header user_id,initial_followers,video_count,clip_count");
    }
    std::vector<ChannelProfile> profiles;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 4) throw ValidationError("profiles row must have 4 fields");
        ChannelProfile p;
        p.user_id = fields[0];
        try {
            p.initial_followers = std::stoll(fields[1]);
            p.video_count = std::stoll(fields[2]);
            p.clip_count = std::stoll(fields[3]);
        } catch (const std::exception&) {
            throw ValidationError("profiles row has a bad number: " + line);
        }
        if (p.initial_followers < 0 || p.video_count < 0 || p.clip_count < 0) {
            throw ValidationError("profiles row has a negative count: " + line);
        }
        profiles.push_back(std::move(p));
    }
    return profiles;
}

void write_profiles(const std::vector<ChannelProfile>& profiles, const std::filesystem::path& path) {
    CsvWriter csv(path, {"user_id", "initial_followers", "video_count", "clip_count"});
    for (const auto& p : profiles) {
        csv.write_row({CsvWriter::cell(p.user_id), CsvWriter::cell(p.initial_followers),
                       CsvWriter::cell(p.video_count), CsvWriter::cell(p.clip_count)});
    }
}

std::vector<ChannelProfile> derive_profiles(const SnapshotStore& store) {
    std::vector<ChannelProfile> profiles;
    profiles.reserve(store.user_count());
    for (const auto& [user, snaps] : store.by_user()) {
        ChannelProfile p;
        p.user_id = user;
        p.initial_followers = snaps.front().followers;
        profiles.push_back(std::move(p));
    }
    return profiles;
}

}  // namespace channelscope::ingest
