#include "channelscope/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <json.hpp>

#include "channelscope/csv.hpp"
#include "channelscope/distfit.hpp"
#include "channelscope/errors.hpp"

namespace channelscope::report {

namespace {

namespace fs = std::filesystem;

std::string sanitize_for_filename(const std::string& raw) {
    std::string out;
    for (char c : raw) {
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_') {
            out += c;
        } else if (c >= 'A' && c <= 'Z') {
            out += static_cast<char>(c - 'A' + 'a');
        }
    }
    return out.empty() ? "unknown" : out;
}

struct Runner {
    const RunConfig& cfg;
    Manifest manifest;

    ingest::SnapshotStore raw_store;
    ingest::SnapshotStore store;  // after bot filtering
    std::set<std::string> popular_games;
    std::vector<ingest::ChannelProfile> profiles;
    std::vector<cohort::ChannelActivity> activities;       // clean store, user order
    std::vector<sessions::StreamSession> all_sessions;     // flattened, user order
    std::vector<sessions::ChannelWeekStats> bucketable;    // initial followers < 20000
    std::vector<cohort::GrowthLabel> labels;               // aligned with bucketable
    std::set<std::string> outlier_ids;

    explicit Runner(const RunConfig& config) : cfg(config) {}

    void add_artifact(const std::string& name, const std::string& file, std::size_t rows) {
        manifest.artifacts.push_back({name, file, rows});
    }

    void add_stat(const std::string& name, std::int64_t value) {
        manifest.stats.emplace_back(name, value);
    }

    fs::path out(const std::string& file) const { return cfg.out / file; }

    void write_histogram(const std::string& name, const std::string& file,
                         const std::vector<double>& values, distfit::Binning binning) {
        auto bins = distfit::histogram(values, binning, cfg.hist_bins);
        distfit::write_histogram_csv(bins, out(file));
        add_artifact(name, file, bins.size());
    }

    std::vector<cohort::ChannelActivity> build_activities(const ingest::SnapshotStore& from) const {
        return compute_activities(from, popular_games, cfg.non_gaming_tags);
    }

    void stage_load() {
        ingest::ReplayStats replay;
        raw_store = ingest::replay_load(cfg.input, &replay);
        add_stat("log_lines", static_cast<std::int64_t>(replay.lines));
        add_stat("log_lines_skipped", static_cast<std::int64_t>(replay.skipped));
        add_stat("users_loaded", static_cast<std::int64_t>(raw_store.user_count()));
        if (!cfg.games.empty()) {
            auto records = ingest::load_game_popularity(cfg.games);
            popular_games = ingest::top_popular_games(records, cfg.popular_top_k);
        }
    }

    void stage_botscan() {
        // Raw-store gain distributions first, then the filtered counterparts
        // follow in the distfit stage.
        auto raw_activities = build_activities(raw_store);
        std::vector<double> active, inactive;
        for (const auto& act : raw_activities) {
            for (const auto& d : act.gains.deltas) {
                (d.active ? active : inactive).push_back(static_cast<double>(d.followers_delta));
            }
        }
        write_histogram("gain_active_raw_histogram", "hist_gain_active_raw.csv", active,
                        distfit::Binning::linear);
        write_histogram("gain_inactive_raw_histogram", "hist_gain_inactive_raw.csv", inactive,
                        distfit::Binning::linear);

        auto [clean, bot_report] = botscan::filter_dataset(raw_store, cfg.botscan);
        store = std::move(clean);
        botscan::write_report_json(bot_report, out("botscan_report.json"));
        add_artifact("botscan_report", "botscan_report.json", bot_report.removed.size());
        add_stat("users_removed", static_cast<std::int64_t>(bot_report.removed.size()));
        add_stat("users_clean", static_cast<std::int64_t>(store.user_count()));
    }

    void stage_sessions() {
        activities = build_activities(store);
        profiles.clear();
        for (const auto& act : activities) {
            ingest::ChannelProfile p;
            p.user_id = act.stats.user_id;
            p.initial_followers = act.stats.initial_followers;
            profiles.push_back(std::move(p));
        }
        all_sessions.clear();
        for (const auto& act : activities) {
            all_sessions.insert(all_sessions.end(), act.sessions.begin(), act.sessions.end());
        }
        sessions::write_sessions_csv(all_sessions, out("sessions.csv"));
        add_artifact("sessions", "sessions.csv", all_sessions.size());

        CsvWriter csv(out("week_stats.csv"),
                      {"user_id", "initial_followers", "streams_per_week", "hours_per_week",
                       "followers_gained_total", "followers_gained_active",
                       "followers_gained_inactive", "n_streams_lt5h", "n_streams_5to10h",
                       "n_streams_gt10h", "has_gaming", "has_non_gaming", "played_popular_game",
                       "language"});
        for (const auto& act : activities) {
            const auto& s = act.stats;
            csv.write_row({CsvWriter::cell(s.user_id), CsvWriter::cell(s.initial_followers),
                           CsvWriter::cell(static_cast<std::int64_t>(s.streams_per_week)),
                           CsvWriter::cell(s.hours_per_week),
                           CsvWriter::cell(s.followers_gained_total),
                           CsvWriter::cell(s.followers_gained_active),
                           CsvWriter::cell(s.followers_gained_inactive),
                           CsvWriter::cell(static_cast<std::int64_t>(s.n_streams_lt5h)),
                           CsvWriter::cell(static_cast<std::int64_t>(s.n_streams_5to10h)),
                           CsvWriter::cell(static_cast<std::int64_t>(s.n_streams_gt10h)),
                           s.has_gaming ? "1" : "0", s.has_non_gaming ? "1" : "0",
                           s.played_popular_game ? "1" : "0", CsvWriter::cell(s.language)});
        }
        add_artifact("week_stats", "week_stats.csv", csv.rows_written());
    }

    void stage_distfit() {
        std::vector<double> followers, avg_viewers, start_viewers;
        std::int64_t zero_followers = 0;
        for (const auto& p : profiles) {
            if (p.initial_followers == 0) {
                ++zero_followers;
            } else {
                followers.push_back(static_cast<double>(p.initial_followers));
            }
        }
        for (const auto& s : all_sessions) {
            if (s.avg_viewers > 0.0) avg_viewers.push_back(s.avg_viewers);
            if (s.start_viewers > 0) start_viewers.push_back(static_cast<double>(s.start_viewers));
        }
        add_stat("zero_follower_channels", zero_followers);

        std::vector<distfit::NamedFit> fits;
        auto try_fit = [&](const std::string& quantity, const std::vector<double>& samples) {
            try {
                fits.push_back({quantity, distfit::fit_power_law(samples, cfg.fit_xmin)});
            } catch (const ValidationError&) {
                add_stat("fit_skipped_" + quantity, 1);
            }
        };
        try_fit("followers", followers);
        try_fit("avg_viewers", avg_viewers);
        try_fit("start_viewers", start_viewers);
        distfit::write_fits_csv(fits, out("fits.csv"));
        add_artifact("power_law_fits", "fits.csv", fits.size());

        write_histogram("followers_histogram", "hist_followers.csv", followers,
                        distfit::Binning::log);
        write_histogram("avg_viewers_histogram", "hist_avg_viewers.csv", avg_viewers,
                        distfit::Binning::log);
        write_histogram("start_viewers_histogram", "hist_start_viewers.csv", start_viewers,
                        distfit::Binning::log);

        std::vector<double> active, inactive;
        for (const auto& act : activities) {
            for (const auto& d : act.gains.deltas) {
                (d.active ? active : inactive).push_back(static_cast<double>(d.followers_delta));
            }
        }
        write_histogram("gain_active_histogram", "hist_gain_active.csv", active,
                        distfit::Binning::linear);
        write_histogram("gain_inactive_histogram", "hist_gain_inactive.csv", inactive,
                        distfit::Binning::linear);
    }

    void stage_cohort() {
        cohort::write_categories_csv(profiles, out("categories.csv"));
        add_artifact("categories", "categories.csv", 4);

        bucketable.clear();
        for (const auto& act : activities) {
            if (act.stats.initial_followers < cohort::kMaxBucketable) {
                bucketable.push_back(act.stats);
            }
        }
        add_stat("bucketable_channels", static_cast<std::int64_t>(bucketable.size()));

        auto averages = cohort::bucket_gain_averages(bucketable);
        cohort::write_bucket_averages_csv(averages, out("bucket_averages.csv"));
        add_artifact("bucket_averages", "bucket_averages.csv", cohort::kBucketCount);

        labels = cohort::label_growth(bucketable, averages);
        cohort::write_labels_csv(bucketable, labels, out("labels.csv"));
        add_artifact("labels", "labels.csv", labels.size());

        std::vector<learn::LabeledExample> examples = labeled_examples();
        learn::write_class_sizes_csv(examples, out("class_sizes.csv"));
        add_artifact("class_sizes", "class_sizes.csv", 4);

        auto outliers = cohort::isolate_outliers(bucketable, cfg.top_fraction);
        outlier_ids = std::set<std::string>(outliers.begin(), outliers.end());
        cohort::write_outliers_csv(bucketable, outliers, out("outliers.csv"));
        add_artifact("outliers", "outliers.csv", outliers.size());

        std::vector<sessions::StreamSession> outlier_sessions;
        std::vector<cohort::StrategyInput> strategy_inputs;
        std::vector<double> hours_all, hours_outliers, freq_all, freq_outliers;
        std::map<std::string, std::int64_t> outlier_languages;
        std::map<std::string, std::int64_t> outlier_tags;
        for (const auto& act : activities) {
            strategy_inputs.push_back(cohort::make_strategy_input(act.stats, act.sessions));
            bool outlier = outlier_ids.count(act.stats.user_id) > 0;
            freq_all.push_back(static_cast<double>(act.stats.streams_per_week));
            if (outlier) {
                freq_outliers.push_back(static_cast<double>(act.stats.streams_per_week));
                ++outlier_languages[act.stats.language];
            }
            for (const auto& s : act.sessions) {
                hours_all.push_back(s.duration_hours);
                if (outlier) {
                    outlier_sessions.push_back(s);
                    hours_outliers.push_back(s.duration_hours);
                    if (!s.tags.empty()) ++outlier_tags[s.tags.front()];
                }
            }
        }

        auto split_all = cohort::content_split(all_sessions, cfg.non_gaming_tags);
        auto split_outliers = cohort::content_split(outlier_sessions, cfg.non_gaming_tags);
        cohort::write_content_split_csv(split_all, split_outliers, out("content_split.csv"));
        add_artifact("content_split", "content_split.csv", 2);

        auto comparison = cohort::compare_strategy(strategy_inputs, cfg.strategy);
        cohort::write_strategy_csv(comparison, out("strategy.csv"));
        add_artifact("strategy_comparison", "strategy.csv", 4);

        std::set<std::string> languages;
        for (const auto& s : all_sessions) {
            if (!s.language.empty()) languages.insert(s.language);
        }
        for (const auto& lang : languages) {
            auto profile = cohort::peak_hours(activities, lang);
            if (!profile) continue;
            std::string file = "peak_hours_" + sanitize_for_filename(lang) + ".csv";
            cohort::write_peak_hours_csv(*profile, out(file));
            add_artifact("peak_hours_" + lang, file, 48);
        }

        {
            CsvWriter csv(out("language_distribution.csv"), {"language", "n_outlier_channels"});
            for (const auto& [lang, n] : outlier_languages) {
                csv.write_row({CsvWriter::cell(lang), CsvWriter::cell(n)});
            }
            add_artifact("language_distribution", "language_distribution.csv", csv.rows_written());
        }
        {
            CsvWriter csv(out("content_tags.csv"), {"tag", "n_outlier_streams"});
            std::vector<std::pair<std::string, std::int64_t>> tags(outlier_tags.begin(),
                                                                   outlier_tags.end());
            std::sort(tags.begin(), tags.end(), [](const auto& a, const auto& b) {
                return a.second != b.second ? a.second > b.second : a.first < b.first;
            });
            for (const auto& [tag, n] : tags) {
                csv.write_row({CsvWriter::cell(tag), CsvWriter::cell(n)});
            }
            add_artifact("content_tags", "content_tags.csv", csv.rows_written());
        }

        write_histogram("stream_hours_histogram", "hist_stream_hours.csv", hours_all,
                        distfit::Binning::linear);
        write_histogram("stream_hours_outliers_histogram", "hist_stream_hours_outliers.csv",
                        hours_outliers, distfit::Binning::linear);
        write_histogram("streams_per_week_histogram", "hist_streams_per_week.csv", freq_all,
                        distfit::Binning::linear);
        write_histogram("streams_per_week_outliers_histogram",
                        "hist_streams_per_week_outliers.csv", freq_outliers,
                        distfit::Binning::linear);
    }

    std::vector<learn::LabeledExample> labeled_examples() const {
        std::vector<learn::LabeledExample> examples;
        examples.reserve(bucketable.size());
        for (std::size_t i = 0; i < bucketable.size(); ++i) {
            learn::LabeledExample ex;
            ex.features = learn::extract_features(bucketable[i]);
            ex.label = labels[i].cls;
            examples.push_back(ex);
        }
        return examples;
    }

    void stage_learn() {
        auto examples = labeled_examples();
        auto split = learn::split_train_test(examples, cfg.train_fraction, cfg.seed);
        auto balanced = learn::smote(split.train, cfg.smote_k, cfg.seed);
        add_stat("train_examples", static_cast<std::int64_t>(split.train.size()));
        add_stat("test_examples", static_cast<std::int64_t>(split.test.size()));
        add_stat("train_examples_balanced", static_cast<std::int64_t>(balanced.size()));

        auto rows = learn::depth_sweep(balanced, split.test, cfg.depths, cfg.n_trees, cfg.seed);
        learn::write_depth_sweep_csv(rows, out("depth_sweep.csv"));
        add_artifact("depth_sweep", "depth_sweep.csv", rows.size());

        std::size_t best = 0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].report.accuracy > rows[best].report.accuracy) best = i;
        }
        auto model = learn::train_forest(balanced, rows[best].max_depth, cfg.n_trees, cfg.seed);
        learn::save_model(model, out("model.json"));
        add_artifact("model", "model.json", model.trees.size());
        add_stat("best_max_depth", rows[best].max_depth);
    }

    Manifest run() {
        struct Stage {
            const char* name;
            void (Runner::*fn)();
        };
        const Stage stages[] = {
            {"load", &Runner::stage_load},       {"botscan", &Runner::stage_botscan},
            {"sessions", &Runner::stage_sessions}, {"distfit", &Runner::stage_distfit},
            {"cohort", &Runner::stage_cohort},   {"learn", &Runner::stage_learn},
        };
        for (const Stage& stage : stages) {
            try {
                (this->*stage.fn)();
                manifest.stages.push_back(stage.name);
            } catch (const std::exception& e) {
                // Input problems surface directly (exit 2/3); anything after a
                // completed stage is a partial failure recorded in the manifest.
                if (manifest.stages.empty()) throw;
                manifest.error = std::string(stage.name) + ": " + e.what();
                break;
            }
        }
        write_manifest(manifest, out("manifest.json"));
        return manifest;
    }
};

}  // namespace

namespace {

void validate_run_config(const RunConfig& config) {
    if (config.out.empty()) throw ValidationError("output directory required");
    config.botscan.validate();
    config.strategy.validate();
    if (!(config.top_fraction > 0.0) || config.top_fraction > 1.0) {
        throw ValidationError("top_fraction must be in (0, 1]");
    }
    if (config.depths.empty()) throw ValidationError("depth sweep needs at least one depth");
    for (int depth : config.depths) {
        if (depth < 1) throw ValidationError("depths must be >= 1");
    }
    if (config.n_trees < 1) throw ValidationError("n_trees must be >= 1");
    if (!(config.train_fraction > 0.0) || !(config.train_fraction < 1.0)) {
        throw ValidationError("train_fraction must be in (0, 1)");
    }
    if (config.smote_k < 1) throw ValidationError("smote_k must be >= 1");
    if (!(config.fit_xmin > 0.0)) throw ValidationError("fit xmin must be positive");
    if (config.hist_bins < 1) throw ValidationError("hist_bins must be >= 1");
    if (config.popular_top_k < 0) throw ValidationError("popular_top_k must be >= 0");
    if (config.non_gaming_tags.empty()) throw ValidationError("non-gaming tag set must not be empty");
}

}  // namespace

Manifest run_report(const RunConfig& config) {
    validate_run_config(config);
    std::filesystem::create_directories(config.out);
    Runner runner(config);
    return runner.run();
}

std::vector<cohort::ChannelActivity> compute_activities(
    const ingest::SnapshotStore& store, const std::set<std::string>& popular_games,
    const std::set<std::string>& non_gaming_tags) {
    std::vector<cohort::ChannelActivity> result;
    result.reserve(store.user_count());
    for (const auto& [user, snaps] : store.by_user()) {
        cohort::ChannelActivity act;
        act.sessions = sessions::build_sessions(snaps);
        act.gains = sessions::gain_series(snaps, act.sessions);
        ingest::ChannelProfile profile;
        profile.user_id = user;
        profile.initial_followers = snaps.front().followers;
        act.stats =
            sessions::week_stats(profile, act.sessions, act.gains, popular_games, non_gaming_tags);
        result.push_back(std::move(act));
    }
    return result;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
    nlohmann::json j;
    j["stages"] = manifest.stages;
    j["artifacts"] = nlohmann::json::array();
    for (const auto& a : manifest.artifacts) {
        j["artifacts"].push_back({{"name", a.name}, {"path", a.path}, {"rows", a.rows}});
    }
    j["stats"] = nlohmann::json::object();
    for (const auto& [k, v] : manifest.stats) j["stats"][k] = v;
    if (!manifest.error.empty()) j["error"] = manifest.error;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace channelscope::report
