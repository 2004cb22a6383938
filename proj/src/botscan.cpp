#include "channelscope/botscan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "channelscope/errors.hpp"
#include "channelscope/sessions.hpp"

namespace channelscope::botscan {

void BotScanConfig::validate() const {
    if (!(ratio > 1.0)) throw ValidationError("botscan ratio must be > 1");
    if (min_jump < 0) throw ValidationError("botscan min_jump must be >= 0");
}

std::vector<std::size_t> detect_bot_behavior(std::span<const std::int64_t> followers,
                                             const BotScanConfig& config) {
    config.validate();
    std::vector<std::size_t> flags;
    if (followers.size() < 4) return flags;

    std::vector<double> abs_delta(followers.size() - 1);
    for (std::size_t j = 0; j + 1 < followers.size(); ++j) {
        abs_delta[j] = std::abs(static_cast<double>(followers[j + 1] - followers[j]));
    }
    for (std::size_t j = 1; j + 1 < abs_delta.size(); ++j) {
        if (abs_delta[j] > config.ratio * abs_delta[j - 1] &&
            abs_delta[j] > config.ratio * abs_delta[j + 1] &&
            abs_delta[j] >= static_cast<double>(config.min_jump)) {
            flags.push_back(j);
        }
    }
    return flags;
}

std::pair<ingest::SnapshotStore, BotScanReport> filter_dataset(const ingest::SnapshotStore& store,
                                                               const BotScanConfig& config) {
    config.validate();
    ingest::SnapshotStore clean;
    BotScanReport report;
    for (const auto& [user, snaps] : store.by_user()) {
        auto filled = sessions::forward_filled_followers(snaps);
        auto flags = detect_bot_behavior(filled.followers, config);
        if (flags.empty()) {
            for (const auto& s : snaps) clean.insert(s);
            continue;
        }
        FlaggedUser flagged;
        flagged.user_id = user;
        flagged.flags = std::move(flags);
        flagged.max_followers = *std::max_element(filled.followers.begin(), filled.followers.end());
        if (flagged.max_followers > 10000) ++report.tier_gt10k;
        if (flagged.max_followers > 100000) ++report.tier_gt100k;
        report.removed.push_back(std::move(flagged));
    }
    clean.finalize();
    return {std::move(clean), std::move(report)};
}

std::string report_to_json(const BotScanReport& report) {
    nlohmann::json j;
    j["removed"] = nlohmann::json::array();
    for (const auto& user : report.removed) {
        j["removed"].push_back({{"user_id", user.user_id}, {"flags", user.flags}});
    }
    j["tiers"] = {{"gt10k", report.tier_gt10k}, {"gt100k", report.tier_gt100k}};
    return j.dump(2);
}

void write_report_json(const BotScanReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << report_to_json(report) << '\n';
}

}  // namespace channelscope::botscan
