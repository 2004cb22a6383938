#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "channelscope/ingest.hpp"

namespace channelscope::botscan {

struct BotScanConfig {
    // A delta is suspicious when it exceeds both neighboring deltas by this
    // factor. min_jump additionally requires a minimum absolute size; the
    // default 0 keeps the bare ratio rule, under which any nonzero delta
    // between two zero deltas is flagged.
    double ratio = 100.0;
    std::int64_t min_jump = 0;

    void validate() const;
};

struct FlaggedUser {
    std::string user_id;
    std::vector<std::size_t> flags;  // delta indices satisfying the predicate
    std::int64_t max_followers = 0;
};

struct BotScanReport {
    std::vector<FlaggedUser> removed;
    std::size_t tier_gt10k = 0;   // removed users whose followers exceed 10,000
    std::size_t tier_gt100k = 0;  // ... and 100,000 (subset of the above)
};

// Flags delta index j when |d[j]| > ratio*|d[j-1]| and |d[j]| > ratio*|d[j+1]|
// and |d[j]| >= min_jump, for 1 <= j <= len(d)-2. The series must already be
// on the uniform grid (missing slots forward-filled). Fewer than 4 values
// cannot satisfy the predicate and yield no flags.
std::vector<std::size_t> detect_bot_behavior(std::span<const std::int64_t> followers,
                                             const BotScanConfig& config = {});

// Removes every user with at least one flagged delta from the store.
std::pair<ingest::SnapshotStore, BotScanReport> filter_dataset(const ingest::SnapshotStore& store,
                                                               const BotScanConfig& config = {});

std::string report_to_json(const BotScanReport& report);
void write_report_json(const BotScanReport& report, const std::filesystem::path& path);

}  // namespace channelscope::botscan
