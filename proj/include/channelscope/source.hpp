#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "channelscope/clock.hpp"
#include "channelscope/ingest.hpp"

namespace channelscope::ingest {

// A source's answer for one channel at the moment of the request.
struct ChannelState {
    bool live = false;
    std::int64_t followers = 0;
    std::optional<std::string> stream_id;
    std::optional<std::int64_t> viewers;
    std::optional<std::string> game_id;
    std::optional<std::string> game_name;
    std::string language;
    std::vector<std::string> tags;
};

// Transport-level failure; the poller retries these.
struct SourceUnavailable : std::runtime_error {
    explicit SourceUnavailable(const std::string& what) : std::runtime_error(what) {}
};

// The source answered but the payload cannot be decoded; not retried.
struct MalformedPayload : std::runtime_error {
    explicit MalformedPayload(const std::string& what) : std::runtime_error(what) {}
};

class TelemetrySource {
public:
    virtual ~TelemetrySource() = default;

    // nullopt means the source has no record of the user. Throws
    // SourceUnavailable / MalformedPayload otherwise.
    virtual std::optional<ChannelState> fetch(const std::string& user_id) = 0;
};

// Parses the JSON payload shared by the fixture files and the live adapter.
// Throws MalformedPayload on missing keys, wrong types or negative counts.
ChannelState parse_channel_state(const std::string& payload);

// In-memory source for tests and replay-style collection. Answers from a
// static table or from a per-request callback; can fail or produce malformed
// payloads on demand and journals every fetch for rate-limit assertions.
class FixtureSource : public TelemetrySource {
public:
    explicit FixtureSource(Clock* clock = nullptr) : clock_(clock) {}

    void set_state(const std::string& user_id, ChannelState state);
    void set_callback(std::function<std::optional<ChannelState>(const std::string&, Timestamp)> cb);
    // Fail the next `times` fetches of this user (SourceUnavailable);
    // times < 0 fails forever.
    void fail_user(const std::string& user_id, int times = -1);
    void mark_malformed(const std::string& user_id);

    std::optional<ChannelState> fetch(const std::string& user_id) override;

    struct JournalEntry {
        Timestamp ts;
        std::string user_id;
    };
    std::vector<JournalEntry> journal() const;

    // Loads a JSON object {user_id: state|null, ...}; entries may also carry
    // {"fail": true} or {"malformed": true}.
    static std::unique_ptr<FixtureSource> from_file(const std::filesystem::path& path,
                                                    Clock* clock = nullptr);

private:
    mutable std::mutex mu_;
    Clock* clock_;
    std::map<std::string, ChannelState> states_;
    std::map<std::string, int> fail_counts_;
    std::map<std::string, bool> malformed_;
    std::function<std::optional<ChannelState>(const std::string&, Timestamp)> callback_;
    std::vector<JournalEntry> journal_;
};

// Thin live adapter: GET {base_url}/channels/{user_id}, expecting the same
// JSON payload as the fixture format. Reads CHANNELSCOPE_API_TOKEN for the
// Authorization header; the token is never written to logs or errors.
class HttpTelemetrySource : public TelemetrySource {
public:
    explicit HttpTelemetrySource(std::string base_url);
    ~HttpTelemetrySource() override;

    std::optional<ChannelState> fetch(const std::string& user_id) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace channelscope::ingest
