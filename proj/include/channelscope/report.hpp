#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "channelscope/botscan.hpp"
#include "channelscope/cohort.hpp"
#include "channelscope/learn.hpp"

namespace channelscope::report {

struct RunConfig {
    std::filesystem::path input;  // snapshot log (JSONL)
    std::filesystem::path games;  // optional game-popularity CSV
    std::filesystem::path out;    // output directory

    botscan::BotScanConfig botscan;
    std::set<std::string> non_gaming_tags = sessions::default_non_gaming_tags();
    cohort::StrategyCriteria strategy;
    double top_fraction = 0.05;
    int popular_top_k = 20;

    std::vector<int> depths = learn::default_sweep_depths();
    int n_trees = 100;
    double train_fraction = 0.8;
    int smote_k = 5;

    double fit_xmin = 1.0;
    int hist_bins = 20;
    std::uint64_t seed = 1;
};

struct Artifact {
    std::string name;
    std::string path;  // relative to the output directory
    std::size_t rows = 0;
};

struct Manifest {
    std::vector<std::string> stages;  // completed, in order
    std::vector<Artifact> artifacts;
    std::vector<std::pair<std::string, std::int64_t>> stats;
    std::string error;  // empty on success

    bool ok() const { return error.empty(); }
};

// Runs filter -> sessions -> distfit -> cohort -> learn, writing every table
// and figure analog under config.out plus a manifest.json. A stage failure
// stops the pipeline; the manifest then records the completed stages and the
// error. Outputs are byte-identical for identical (input, config, seed).
Manifest run_report(const RunConfig& config);

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Sessions, gain series and week stats for every channel of a store, in
// user-id order.
std::vector<cohort::ChannelActivity> compute_activities(
    const ingest::SnapshotStore& store, const std::set<std::string>& popular_games,
    const std::set<std::string>& non_gaming_tags = sessions::default_non_gaming_tags());

}  // namespace channelscope::report
