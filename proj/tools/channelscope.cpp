// channelscope: streaming-channel telemetry collection and growth analysis.
//
// Subcommands: collect, synth, botscan, sessions, distfit, cohort, train,
// report. Exit codes: 0 success, 2 missing input file, 3 validation failure,
// 4 partial pipeline failure (see manifest.json for completed stages).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "channelscope/botscan.hpp"
#include "channelscope/clock.hpp"
#include "channelscope/cohort.hpp"
#include "channelscope/csv.hpp"
#include "channelscope/distfit.hpp"
#include "channelscope/errors.hpp"
#include "channelscope/learn.hpp"
#include "channelscope/poller.hpp"
#include "channelscope/report.hpp"
#include "channelscope/sessions.hpp"
#include "channelscope/source.hpp"
#include "channelscope/synth.hpp"

namespace fs = std::filesystem;
using namespace channelscope;

namespace {

constexpr int kExitMissingInput = 2;
constexpr int kExitValidation = 3;
constexpr int kExitPartialPipeline = 4;

std::set<std::string> load_tags_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingInputError("cannot open tags file: " + path.string());
    std::set<std::string> tags;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty() && line[0] != '#') tags.insert(line);
    }
    if (tags.empty()) throw ValidationError("tags file has no tags: " + path.string());
    return tags;
}

std::vector<std::pair<std::string, double>> parse_language_mix(const std::string& text) {
    std::vector<std::pair<std::string, double>> mix;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto comma = text.find(',', pos);
        std::string item = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        auto colon = item.find(':');
        if (colon == std::string::npos) throw ValidationError("bad --languages entry: " + item);
        try {
            mix.emplace_back(item.substr(0, colon), std::stod(item.substr(colon + 1)));
        } catch (const std::exception&) {
            throw ValidationError("bad --languages fraction in: " + item);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return mix;
}

std::vector<std::string> load_population_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingInputError("cannot open population file: " + path.string());
    std::vector<std::string> users;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) users.push_back(line);
    }
    return users;
}

void require_input_file(const fs::path& path, const char* what) {
    if (path.empty()) throw ValidationError(std::string(what) + " path required");
    if (!fs::exists(path)) throw MissingInputError(std::string(what) + " not found: " + path.string());
}

struct CommonOptions {
    std::string input;
    std::string games;
    std::string out = "out";
    std::uint64_t seed = 1;
    double ratio = 100.0;
    std::int64_t min_jump = 0;
    double top_fraction = 0.05;
    std::vector<int> depths = learn::default_sweep_depths();
    int trees = 100;
    double train_fraction = 0.8;
    int smote_k = 5;
    std::string tags_file;
    double xmin = 1.0;
    int bins = 20;
    int popular_top_k = 20;
};

std::set<std::string> resolve_tags(const CommonOptions& opt) {
    return opt.tags_file.empty() ? sessions::default_non_gaming_tags()
                                 : load_tags_file(opt.tags_file);
}

report::RunConfig to_run_config(const CommonOptions& opt) {
    report::RunConfig cfg;
    cfg.input = opt.input;
    cfg.games = opt.games;
    cfg.out = opt.out;
    cfg.botscan.ratio = opt.ratio;
    cfg.botscan.min_jump = opt.min_jump;
    cfg.non_gaming_tags = resolve_tags(opt);
    cfg.top_fraction = opt.top_fraction;
    cfg.depths = opt.depths;
    cfg.n_trees = opt.trees;
    cfg.train_fraction = opt.train_fraction;
    cfg.smote_k = opt.smote_k;
    cfg.fit_xmin = opt.xmin;
    cfg.hist_bins = opt.bins;
    cfg.popular_top_k = opt.popular_top_k;
    cfg.seed = opt.seed;
    return cfg;
}

std::set<std::string> load_popular_games(const CommonOptions& opt) {
    if (opt.games.empty()) return {};
    require_input_file(opt.games, "game popularity file");
    return ingest::top_popular_games(ingest::load_game_popularity(opt.games), opt.popular_top_k);
}

int cmd_synth(const CommonOptions& opt, int n, double alpha, double follower_xmin, int weeks,
              double bot_rate, double bot_ratio, const std::string& languages) {
    synth::SynthConfig cfg;
    cfg.n_channels = n;
    cfg.follower_alpha = alpha;
    cfg.follower_xmin = follower_xmin;
    cfg.weeks = weeks;
    cfg.bot_rate = bot_rate;
    cfg.bot_magnitude_ratio = bot_ratio;
    cfg.seed = opt.seed;
    if (!languages.empty()) cfg.language_mix = parse_language_mix(languages);

    auto population = synth::generate_population(cfg);
    auto log = synth::generate_snapshots(population);

    fs::create_directories(opt.out);
    fs::path out(opt.out);
    std::vector<std::string> tainted;
    if (cfg.bot_rate > 0.0) {
        auto injection = synth::inject_bot_anomalies(log, cfg);
        log = std::move(injection.log);
        tainted = std::move(injection.tainted_users);
        nlohmann::json truth;
        truth["tainted_users"] = tainted;
        truth["skipped_users"] = injection.skipped_users;
        std::ofstream f(out / "bot_truth.json");
        f << truth.dump(2) << '\n';
    }
    {
        std::ofstream f(out / "snapshots.jsonl");
        if (!f) throw std::runtime_error("cannot write snapshots.jsonl");
        for (const auto& snap : log) f << ingest::to_jsonl_line(snap) << '\n';
    }
    ingest::write_game_popularity(population.game_popularity, out / "game_popularity.csv");
    std::vector<ingest::ChannelProfile> profiles;
    for (const auto& ch : population.channels) profiles.push_back(ch.profile);
    ingest::write_profiles(profiles, out / "profiles.csv");

    std::cout << "synth: " << population.channels.size() << " channels, " << log.size()
              << " snapshots, " << tainted.size() << " tainted -> " << opt.out << "\n";
    return 0;
}

int cmd_collect(const CommonOptions& opt, const std::string& fixture, const std::string& base_url,
                const std::string& population_file, int weeks, int cohort_size,
                std::int64_t interval, int rate_limit, int max_in_flight, bool simulate,
                const std::string& start_iso) {
    std::vector<std::string> population = load_population_file(population_file);

    Timestamp start = 1625097600;
    if (!start_iso.empty()) {
        auto parsed = parse_iso8601(start_iso);
        if (!parsed) throw ValidationError("bad --start timestamp: " + start_iso);
        start = *parsed;
    }

    std::unique_ptr<ingest::Clock> clock;
    if (simulate) {
        clock = std::make_unique<ingest::SimulatedClock>(start);
    } else {
        clock = std::make_unique<ingest::SystemClock>();
    }

    std::unique_ptr<ingest::TelemetrySource> source;
    if (!fixture.empty()) {
        require_input_file(fixture, "fixture file");
        source = ingest::FixtureSource::from_file(fixture, clock.get());
    } else if (!base_url.empty()) {
        source = std::make_unique<ingest::HttpTelemetrySource>(base_url);
    } else {
        throw ValidationError("collect needs --fixture or --base-url");
    }

    ingest::CollectorConfig cfg;
    cfg.cohort_size = cohort_size;
    cfg.weeks = weeks;
    cfg.poll_interval_seconds = interval;
    cfg.rate_limit_per_minute = rate_limit;
    cfg.max_in_flight = max_in_flight;

    fs::create_directories(fs::path(opt.out));
    ingest::JsonlSink sink(fs::path(opt.out) / "snapshots.jsonl");
    auto summary = ingest::run_collection(cfg, *source, sink, population, *clock);

    std::cout << "collect: wrote " << summary.snapshots_written << " snapshots over "
              << summary.slots_polled << " slots, " << summary.failed_polls << " failed polls\n";
    if (summary.aborted) {
        std::cerr << "collect aborted: " << summary.abort_reason << "\n";
        return kExitPartialPipeline;
    }
    return 0;
}

int cmd_botscan(const CommonOptions& opt) {
    require_input_file(opt.input, "snapshot log");
    auto store = ingest::replay_load(opt.input);
    botscan::BotScanConfig cfg{opt.ratio, opt.min_jump};
    auto [clean, report] = botscan::filter_dataset(store, cfg);
    fs::create_directories(opt.out);
    botscan::write_report_json(report, fs::path(opt.out) / "botscan_report.json");
    ingest::write_snapshot_log(clean, fs::path(opt.out) / "clean_snapshots.jsonl");
    std::cout << "botscan: removed " << report.removed.size() << " of " << store.user_count()
              << " users (gt10k=" << report.tier_gt10k << ", gt100k=" << report.tier_gt100k
              << ")\n";
    return 0;
}

int cmd_sessions(const CommonOptions& opt) {
    require_input_file(opt.input, "snapshot log");
    auto store = ingest::replay_load(opt.input);
    auto activities = report::compute_activities(store, load_popular_games(opt), resolve_tags(opt));
    std::vector<sessions::StreamSession> all;
    for (const auto& act : activities) {
        all.insert(all.end(), act.sessions.begin(), act.sessions.end());
    }
    fs::create_directories(opt.out);
    sessions::write_sessions_csv(all, fs::path(opt.out) / "sessions.csv");
    std::cout << "sessions: " << all.size() << " sessions from " << store.user_count()
              << " users\n";
    return 0;
}

int cmd_distfit(const CommonOptions& opt) {
    require_input_file(opt.input, "snapshot log");
    auto store = ingest::replay_load(opt.input);
    auto activities = report::compute_activities(store, {}, resolve_tags(opt));

    std::vector<double> followers, avg_viewers, start_viewers;
    for (const auto& act : activities) {
        if (act.stats.initial_followers > 0) {
            followers.push_back(static_cast<double>(act.stats.initial_followers));
        }
        for (const auto& s : act.sessions) {
            if (s.avg_viewers > 0.0) avg_viewers.push_back(s.avg_viewers);
            if (s.start_viewers > 0) start_viewers.push_back(static_cast<double>(s.start_viewers));
        }
    }
    fs::create_directories(opt.out);
    fs::path out(opt.out);
    std::vector<distfit::NamedFit> fits;
    auto try_fit = [&](const std::string& name, const std::vector<double>& samples) {
        try {
            fits.push_back({name, distfit::fit_power_law(samples, opt.xmin)});
        } catch (const ValidationError& e) {
            std::cerr << "distfit: skipping " << name << ": " << e.what() << "\n";
        }
    };
    try_fit("followers", followers);
    try_fit("avg_viewers", avg_viewers);
    try_fit("start_viewers", start_viewers);
    distfit::write_fits_csv(fits, out / "fits.csv");
    auto hist = [&](const std::string& file, const std::vector<double>& values) {
        auto bins = distfit::histogram(values, distfit::Binning::log, opt.bins);
        distfit::write_histogram_csv(bins, out / file);
    };
    hist("hist_followers.csv", followers);
    hist("hist_avg_viewers.csv", avg_viewers);
    hist("hist_start_viewers.csv", start_viewers);
    std::cout << "distfit: " << fits.size() << " fits -> " << opt.out << "\n";
    return 0;
}

int cmd_cohort(const CommonOptions& opt) {
    require_input_file(opt.input, "snapshot log");
    auto store = ingest::replay_load(opt.input);
    auto activities = report::compute_activities(store, load_popular_games(opt), resolve_tags(opt));

    fs::create_directories(opt.out);
    fs::path out(opt.out);

    std::vector<ingest::ChannelProfile> profiles;
    std::vector<sessions::StreamSession> all_sessions;
    std::vector<cohort::StrategyInput> strategy_inputs;
    std::vector<sessions::ChannelWeekStats> bucketable;
    for (const auto& act : activities) {
        ingest::ChannelProfile p;
        p.user_id = act.stats.user_id;
        p.initial_followers = act.stats.initial_followers;
        profiles.push_back(p);
        all_sessions.insert(all_sessions.end(), act.sessions.begin(), act.sessions.end());
        strategy_inputs.push_back(cohort::make_strategy_input(act.stats, act.sessions));
        if (act.stats.initial_followers < cohort::kMaxBucketable) bucketable.push_back(act.stats);
    }
    cohort::write_categories_csv(profiles, out / "categories.csv");
    auto averages = cohort::bucket_gain_averages(bucketable);
    cohort::write_bucket_averages_csv(averages, out / "bucket_averages.csv");
    auto labels = cohort::label_growth(bucketable, averages);
    cohort::write_labels_csv(bucketable, labels, out / "labels.csv");
    auto outliers = cohort::isolate_outliers(bucketable, opt.top_fraction);
    cohort::write_outliers_csv(bucketable, outliers, out / "outliers.csv");

    std::set<std::string> outlier_set(outliers.begin(), outliers.end());
    std::vector<sessions::StreamSession> outlier_sessions;
    for (const auto& act : activities) {
        if (outlier_set.count(act.stats.user_id)) {
            outlier_sessions.insert(outlier_sessions.end(), act.sessions.begin(),
                                    act.sessions.end());
        }
    }
    auto tags = resolve_tags(opt);
    cohort::write_content_split_csv(cohort::content_split(all_sessions, tags),
                                    cohort::content_split(outlier_sessions, tags),
                                    out / "content_split.csv");
    cohort::write_strategy_csv(cohort::compare_strategy(strategy_inputs, {}),
                               out / "strategy.csv");

    std::set<std::string> languages;
    for (const auto& s : all_sessions) {
        if (!s.language.empty()) languages.insert(s.language);
    }
    for (const auto& lang : languages) {
        if (auto profile = cohort::peak_hours(activities, lang)) {
            cohort::write_peak_hours_csv(*profile, out / ("peak_hours_" + lang + ".csv"));
        }
    }
    std::cout << "cohort: " << bucketable.size() << " bucketable channels, " << outliers.size()
              << " outliers -> " << opt.out << "\n";
    return 0;
}

int cmd_train(const CommonOptions& opt) {
    require_input_file(opt.input, "snapshot log");
    auto store = ingest::replay_load(opt.input);
    auto activities = report::compute_activities(store, load_popular_games(opt), resolve_tags(opt));

    std::vector<sessions::ChannelWeekStats> bucketable;
    for (const auto& act : activities) {
        if (act.stats.initial_followers < cohort::kMaxBucketable) bucketable.push_back(act.stats);
    }
    auto labels = cohort::label_growth(bucketable);
    std::vector<learn::LabeledExample> examples;
    for (std::size_t i = 0; i < bucketable.size(); ++i) {
        examples.push_back({learn::extract_features(bucketable[i]), labels[i].cls});
    }
    auto split = learn::split_train_test(examples, opt.train_fraction, opt.seed);
    auto balanced = learn::smote(split.train, opt.smote_k, opt.seed);
    auto rows = learn::depth_sweep(balanced, split.test, opt.depths, opt.trees, opt.seed);

    fs::create_directories(opt.out);
    learn::write_depth_sweep_csv(rows, fs::path(opt.out) / "depth_sweep.csv");
    learn::write_class_sizes_csv(examples, fs::path(opt.out) / "class_sizes.csv");
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].report.accuracy > rows[best].report.accuracy) best = i;
    }
    auto model = learn::train_forest(balanced, rows[best].max_depth, opt.trees, opt.seed);
    learn::save_model(model, fs::path(opt.out) / "model.json");
    std::cout << "train: best depth " << rows[best].max_depth << " accuracy "
              << format_double(rows[best].report.accuracy) << " -> " << opt.out << "\n";
    return 0;
}

int cmd_report(const CommonOptions& opt) {
    require_input_file(opt.input, "snapshot log");
    if (!opt.games.empty()) require_input_file(opt.games, "game popularity file");
    auto manifest = report::run_report(to_run_config(opt));
    if (!manifest.ok()) {
        std::cerr << "report: pipeline failed at stage after ["
                  << (manifest.stages.empty() ? "" : manifest.stages.back())
                  << "]: " << manifest.error << "\n";
        return kExitPartialPipeline;
    }
    std::cout << "report: " << manifest.artifacts.size() << " artifacts -> " << opt.out
              << "/manifest.json\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming-channel telemetry collection and growth analysis"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (INI, sections per subcommand)");

    CommonOptions opt;
    auto add_common = [&](CLI::App* sub, bool needs_input) {
        sub->fallthrough();  // lets --config (a parent option) follow the subcommand
        if (needs_input) sub->add_option("--input", opt.input, "Snapshot log (JSONL)");
        sub->add_option("--games", opt.games, "Game popularity CSV");
        sub->add_option("--out", opt.out, "Output directory");
        sub->add_option("--seed", opt.seed, "Master seed");
        sub->add_option("--ratio", opt.ratio, "Bot step ratio threshold");
        sub->add_option("--min-jump", opt.min_jump, "Bot minimum absolute jump");
        sub->add_option("--top-fraction", opt.top_fraction, "Outlier fraction per bucket");
        sub->add_option("--depths", opt.depths, "Forest depth sweep")->delimiter(',');
        sub->add_option("--trees", opt.trees, "Trees per forest");
        sub->add_option("--train-fraction", opt.train_fraction, "Training split fraction");
        sub->add_option("--smote-k", opt.smote_k, "SMOTE neighbor count");
        sub->add_option("--tags-file", opt.tags_file, "Non-gaming tags, one per line");
        sub->add_option("--xmin", opt.xmin, "Power-law fit xmin");
        sub->add_option("--bins", opt.bins, "Histogram bin count");
        sub->add_option("--popular-top-k", opt.popular_top_k, "Daily rank cutoff for popular games");
    };

    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic fixture");
    int synth_n = 1000, synth_weeks = 1;
    double synth_alpha = 1.25, synth_xmin = 10.0, synth_bot_rate = 0.0, synth_bot_ratio = 200.0;
    std::string synth_languages;
    add_common(synth_cmd, false);
    synth_cmd->add_option("--n", synth_n, "Number of channels");
    synth_cmd->add_option("--alpha", synth_alpha, "Follower power-law exponent");
    synth_cmd->add_option("--follower-xmin", synth_xmin, "Follower power-law xmin");
    synth_cmd->add_option("--weeks", synth_weeks, "Observation weeks (cohort rotation)");
    synth_cmd->add_option("--bot-rate", synth_bot_rate, "Fraction of channels to taint");
    synth_cmd->add_option("--bot-ratio", synth_bot_ratio, "Injected step magnitude ratio");
    synth_cmd->add_option("--languages", synth_languages, "Mix, e.g. en:0.7,es:0.3");

    auto* collect_cmd = app.add_subcommand("collect", "Poll a telemetry source");
    std::string collect_fixture, collect_base_url, collect_population, collect_start;
    int collect_weeks = 1, collect_cohort = 4000, collect_rate = 0, collect_in_flight = 8;
    std::int64_t collect_interval = kSecondsPerSlot;
    bool collect_simulate = false;
    add_common(collect_cmd, false);
    collect_cmd->add_option("--fixture", collect_fixture, "Fixture source JSON");
    collect_cmd->add_option("--base-url", collect_base_url, "Live adapter base URL");
    collect_cmd->add_option("--population", collect_population, "User ids, one per line")
        ->required();
    collect_cmd->add_option("--weeks", collect_weeks, "Rotation weeks");
    collect_cmd->add_option("--cohort-size", collect_cohort, "Users per weekly cohort");
    collect_cmd->add_option("--interval", collect_interval, "Poll interval seconds");
    collect_cmd->add_option("--rate-limit", collect_rate, "Requests per minute (0 = unlimited)");
    collect_cmd->add_option("--max-in-flight", collect_in_flight, "Concurrent requests");
    collect_cmd->add_flag("--simulate", collect_simulate, "Run on a simulated clock");
    collect_cmd->add_option("--start", collect_start, "Simulated start (ISO-8601)");

    auto* botscan_cmd = app.add_subcommand("botscan", "Flag and remove bot-like channels");
    add_common(botscan_cmd, true);
    auto* sessions_cmd = app.add_subcommand("sessions", "Reconstruct stream sessions");
    add_common(sessions_cmd, true);
    auto* distfit_cmd = app.add_subcommand("distfit", "Fit popularity power laws");
    add_common(distfit_cmd, true);
    auto* cohort_cmd = app.add_subcommand("cohort", "Cohort, outlier and strategy analyses");
    add_common(cohort_cmd, true);
    auto* train_cmd = app.add_subcommand("train", "Train the growth classifier");
    add_common(train_cmd, true);
    auto* report_cmd = app.add_subcommand("report", "Run the full pipeline");
    add_common(report_cmd, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) {
            return cmd_synth(opt, synth_n, synth_alpha, synth_xmin, synth_weeks, synth_bot_rate,
                             synth_bot_ratio, synth_languages);
        }
        if (collect_cmd->parsed()) {
            return cmd_collect(opt, collect_fixture, collect_base_url, collect_population,
                               collect_weeks, collect_cohort, collect_interval, collect_rate,
                               collect_in_flight, collect_simulate, collect_start);
        }
        if (botscan_cmd->parsed()) return cmd_botscan(opt);
        if (sessions_cmd->parsed()) return cmd_sessions(opt);
        if (distfit_cmd->parsed()) return cmd_distfit(opt);
        if (cohort_cmd->parsed()) return cmd_cohort(opt);
        if (train_cmd->parsed()) return cmd_train(opt);
        if (report_cmd->parsed()) return cmd_report(opt);
    } catch (const MissingInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMissingInput;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const PipelineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPartialPipeline;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
