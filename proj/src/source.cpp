#include "channelscope/source.hpp"

#include <fstream>

#include <json.hpp>

#include "channelscope/errors.hpp"

namespace channelscope::ingest {

using nlohmann::json;

ChannelState parse_channel_state(const std::string& payload) {
    json j = json::parse(payload, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw MalformedPayload("payload is not a JSON object");

    ChannelState state;
    if (!j.contains("live") || !j["live"].is_boolean()) throw MalformedPayload("missing live flag");
    state.live = j["live"].get<bool>();
    if (!j.contains("followers") || !j["followers"].is_number_integer()) {
        throw MalformedPayload("missing followers count");
    }
    state.followers = j["followers"].get<std::int64_t>();
    if (state.followers < 0) throw MalformedPayload("negative followers");

    auto opt_string = [&](const char* key) -> std::optional<std::string> {
        if (!j.contains(key) || j[key].is_null()) return std::nullopt;
        if (!j[key].is_string()) throw MalformedPayload(std::string(key) + " must be a string");
        return j[key].get<std::string>();
    };
    state.stream_id = opt_string("stream_id");
    state.game_id = opt_string("game_id");
    state.game_name = opt_string("game_name");
    if (j.contains("viewers") && !j["viewers"].is_null()) {
        if (!j["viewers"].is_number_integer()) throw MalformedPayload("viewers must be an integer");
        auto v = j["viewers"].get<std::int64_t>();
        if (v < 0) throw MalformedPayload("negative viewers");
        state.viewers = v;
    }
    if (auto lang = opt_string("language")) state.language = lowercase_language(*lang);
    if (j.contains("tags")) {
        if (!j["tags"].is_array()) throw MalformedPayload("tags must be an array");
        for (const auto& t : j["tags"]) {
            if (!t.is_string()) throw MalformedPayload("tags must be strings");
            state.tags.push_back(t.get<std::string>());
        }
    }
    return state;
}

void FixtureSource::set_state(const std::string& user_id, ChannelState state) {
    std::lock_guard lock(mu_);
    states_[user_id] = std::move(state);
}

void FixtureSource::set_callback(
    std::function<std::optional<ChannelState>(const std::string&, Timestamp)> cb) {
    std::lock_guard lock(mu_);
    callback_ = std::move(cb);
}

void FixtureSource::fail_user(const std::string& user_id, int times) {
    std::lock_guard lock(mu_);
    fail_counts_[user_id] = times;
}

void FixtureSource::mark_malformed(const std::string& user_id) {
    std::lock_guard lock(mu_);
    malformed_[user_id] = true;
}

std::optional<ChannelState> FixtureSource::fetch(const std::string& user_id) {
    std::function<std::optional<ChannelState>(const std::string&, Timestamp)> cb;
    Timestamp now = clock_ ? clock_->now() : 0;
    {
        std::lock_guard lock(mu_);
        journal_.push_back({now, user_id});
        if (auto it = fail_counts_.find(user_id); it != fail_counts_.end() && it->second != 0) {
            if (it->second > 0) --it->second;
            throw SourceUnavailable("fixture failure for " + user_id);
        }
        if (auto it = malformed_.find(user_id); it != malformed_.end() && it->second) {
            throw MalformedPayload("fixture malformed payload for " + user_id);
        }
        if (!callback_) {
            auto it = states_.find(user_id);
            if (it == states_.end()) return std::nullopt;
            return it->second;
        }
        cb = callback_;
    }
    return cb(user_id, now);
}

std::vector<FixtureSource::JournalEntry> FixtureSource::journal() const {
    std::lock_guard lock(mu_);
    return journal_;
}

std::unique_ptr<FixtureSource> FixtureSource::from_file(const std::filesystem::path& path,
                                                        Clock* clock) {
    std::ifstream in(path);
    if (!in) throw MissingInputError("cannot open fixture file: " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ValidationError("fixture file must be a JSON object: " + path.string());
    }
    auto source = std::make_unique<FixtureSource>(clock);
    for (const auto& [user, entry] : j.items()) {
        if (entry.is_null()) continue;  // user listed but unknown to the source
        if (entry.is_object() && entry.value("fail", false)) {
            source->fail_user(user);
            continue;
        }
        if (entry.is_object() && entry.value("malformed", false)) {
            source->mark_malformed(user);
            continue;
        }
        source->set_state(user, parse_channel_state(entry.dump()));
    }
    return source;
}

}  // namespace channelscope::ingest
