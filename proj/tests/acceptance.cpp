// Acceptance suite: one pass/fail line per criterion. Everything runs offline
// on synthetic fixtures; the whole binary must finish well under five minutes.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "channelscope/botscan.hpp"
#include "channelscope/cohort.hpp"
#include "channelscope/distfit.hpp"
#include "channelscope/learn.hpp"
#include "channelscope/rng.hpp"
#include "channelscope/sessions.hpp"
#include "channelscope/synth.hpp"

namespace fs = std::filesystem;
using namespace channelscope;

namespace {

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw CheckFailure(what);
}

template <typename T>
std::string str(const T& v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    expect(static_cast<bool>(in), "cannot open " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

// ---------------------------------------------------------------------------
// 1. Bot detector oracle equivalence on a 1,000-channel tainted population.

void criterion_bot_detector() {
    synth::SynthConfig cfg;
    cfg.n_channels = 1000;
    cfg.weeks = 1;  // 336 slots per channel
    cfg.seed = 20210701;
    cfg.bot_rate = 0.10;
    cfg.bot_magnitude_ratio = 200.0;
    auto population = synth::generate_population(cfg);
    auto log = synth::generate_snapshots(population);
    auto injection = synth::inject_bot_anomalies(log, cfg);
    expect(injection.tainted_users.size() == 100,
           "expected 100 tainted channels, got " + str(injection.tainted_users.size()));
    auto store = ingest::store_from_snapshots(injection.log);

    botscan::BotScanConfig scan;
    scan.ratio = 100.0;
    auto start = std::chrono::steady_clock::now();
    auto [clean, report] = botscan::filter_dataset(store, scan);
    double seconds = elapsed_seconds(start);

    std::set<std::string> flagged;
    for (const auto& user : report.removed) flagged.insert(user.user_id);
    std::set<std::string> tainted(injection.tainted_users.begin(), injection.tainted_users.end());
    for (const auto& user : tainted) {
        expect(flagged.count(user) == 1, "missed tainted channel " + user + " (recall < 1)");
    }
    for (const auto& user : flagged) {
        expect(tainted.count(user) == 1, "flagged untainted smooth channel " + user);
    }
    expect(clean.user_count() == 900, "clean store should hold the 900 untainted channels");
    expect(seconds < 1.0, "scan took " + str(seconds) + "s, budget is 1s");
}

// ---------------------------------------------------------------------------
// 2. The step-detector predicate, evaluated literally on three hand series.

void criterion_detector_literalness() {
    auto flags = botscan::detect_bot_behavior(
        std::vector<std::int64_t>{100, 101, 102, 10000, 10001, 10002});
    expect(flags == std::vector<std::size_t>{2},
           "isolated step: expected flag at delta index 2");

    expect(botscan::detect_bot_behavior(std::vector<std::int64_t>(10, 100)).empty(),
           "constant series must not be flagged");

    expect(botscan::detect_bot_behavior(
               std::vector<std::int64_t>{100, 101, 102, 10000, 103, 104})
               .empty(),
           "spike-and-revert must not be flagged");
}

// ---------------------------------------------------------------------------
// 3. Power-law recovery at the three studied exponents.

void criterion_power_law() {
    const double alphas[] = {1.25, 1.11, 2.0};
    std::uint64_t seed = 3001;
    for (double alpha : alphas) {
        Rng rng(seed++);
        std::vector<double> samples;
        samples.reserve(100000);
        for (int i = 0; i < 100000; ++i) {
            samples.push_back(std::pow(1.0 - rng.uniform(), -1.0 / (alpha - 1.0)));
        }
        auto fit = distfit::fit_power_law(samples, 1.0);
        expect(std::abs(fit.alpha - alpha) <= 0.05,
               "alpha " + str(alpha) + " recovered as " + str(fit.alpha) + " (tolerance 0.05)");
        double formula = (fit.alpha - 1.0) / std::sqrt(static_cast<double>(fit.n_tail));
        expect(std::abs(fit.stderr_alpha - formula) <= 0.01 * formula,
               "stderr " + str(fit.stderr_alpha) + " deviates from (alpha-1)/sqrt(n) = " +
                   str(formula) + " by more than 1%");
    }
}

// ---------------------------------------------------------------------------
// 4. Week stats reconstructed from generated snapshots equal ground truth.

void criterion_session_round_trip() {
    synth::SynthConfig cfg;
    cfg.n_channels = 1000;
    cfg.seed = 4004;
    auto population = synth::generate_population(cfg);
    auto store = ingest::store_from_snapshots(synth::generate_snapshots(population));

    for (const auto& truth : population.channels) {
        const auto* snaps = store.find(truth.profile.user_id);
        expect(snaps != nullptr, "missing snapshots for " + truth.profile.user_id);
        auto sessions_built = sessions::build_sessions(*snaps);
        expect(sessions_built.size() == truth.sessions.size(),
               truth.profile.user_id + ": session count mismatch");
        for (std::size_t s = 0; s < sessions_built.size(); ++s) {
            expect(sessions_built[s].duration_hours == truth.sessions[s].duration_slots * 0.5,
                   truth.profile.user_id + ": duration mismatch");
            expect(sessions_built[s].followers_gained == truth.sessions[s].followers_gained,
                   truth.profile.user_id + ": session gain mismatch");
            expect(sessions_built[s].avg_viewers == truth.sessions[s].avg_viewers,
                   truth.profile.user_id + ": avg viewers mismatch");
        }
        auto gains = sessions::gain_series(*snaps, sessions_built);
        auto stats = sessions::week_stats(truth.profile, sessions_built, gains,
                                          population.popular_games);
        expect(stats == truth.week_stats, truth.profile.user_id + ": week stats mismatch");
    }
}

// ---------------------------------------------------------------------------
// 5. Cohort rules against an independent brute-force restatement.

const char* brute_category(std::int64_t f) {
    if (f < 5000) return "small";
    if (f < 10000) return "medium";
    if (f < 100000) return "big";
    return "mega";
}

int brute_bucket(std::int64_t f) { return static_cast<int>(f) / 1000; }

int brute_label(std::int64_t gained, double avg) {
    if (gained < 0) return -1;
    return static_cast<double>(gained) > avg ? 1 : 0;
}

void criterion_cohort_rules() {
    Rng rng(5005);
    for (int i = 0; i < 10000; ++i) {
        std::int64_t f = static_cast<std::int64_t>(rng.bounded(300000));
        expect(cohort::category_name(cohort::categorize(f)) == std::string(brute_category(f)),
               "categorize mismatch at " + str(f));
        std::int64_t bucketable = static_cast<std::int64_t>(rng.bounded(20000));
        expect(cohort::bucketize(bucketable).index == brute_bucket(bucketable),
               "bucketize mismatch at " + str(bucketable));
    }

    std::vector<sessions::ChannelWeekStats> channels;
    for (int i = 0; i < 10000; ++i) {
        sessions::ChannelWeekStats s;
        s.user_id = "c" + str(100000 + i);
        s.initial_followers = static_cast<std::int64_t>(rng.bounded(20000));
        s.followers_gained_total = static_cast<std::int64_t>(rng.bounded(400)) - 40;
        channels.push_back(std::move(s));
    }
    auto averages = cohort::bucket_gain_averages(channels);
    auto labels = cohort::label_growth(channels);
    for (std::size_t i = 0; i < channels.size(); ++i) {
        int bucket = brute_bucket(channels[i].initial_followers);
        int expected = brute_label(channels[i].followers_gained_total,
                                   averages.avg[static_cast<std::size_t>(bucket)]);
        expect(labels[i].cls == expected, "label mismatch for " + channels[i].user_id);
    }

    std::vector<sessions::ChannelWeekStats> outlier_pool(channels.begin(), channels.begin() + 1000);
    auto outliers = cohort::isolate_outliers(outlier_pool, 0.05);
    std::set<std::string> outlier_set(outliers.begin(), outliers.end());
    std::array<std::vector<const sessions::ChannelWeekStats*>, 20> buckets;
    for (const auto& ch : outlier_pool) {
        buckets[static_cast<std::size_t>(brute_bucket(ch.initial_followers))].push_back(&ch);
    }
    for (const auto& bucket : buckets) {
        if (bucket.empty()) continue;
        auto expected = static_cast<std::size_t>(
            std::ceil(0.05 * static_cast<double>(bucket.size())));
        std::size_t found = 0;
        std::int64_t min_out = std::numeric_limits<std::int64_t>::max();
        std::int64_t max_in = std::numeric_limits<std::int64_t>::min();
        for (const auto* ch : bucket) {
            if (outlier_set.count(ch->user_id)) {
                ++found;
                min_out = std::min(min_out, ch->followers_gained_total);
            } else {
                max_in = std::max(max_in, ch->followers_gained_total);
            }
        }
        expect(found == expected, "outlier count " + str(found) + " != ceil rule " + str(expected));
        if (found < bucket.size()) {
            expect(min_out >= max_in, "an outlier gained less than a non-outlier in its bucket");
        }
    }
}

// ---------------------------------------------------------------------------
// 6. SMOTE balances the 80%-scaled class sizes and stays on minority segments.

void criterion_smote() {
    Rng rng(6006);
    std::vector<learn::LabeledExample> train;
    auto add_class = [&](int label, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
            learn::LabeledExample e;
            e.label = label;
            for (auto& f : e.features) f = rng.uniform(0.0, 50.0);
            train.push_back(e);
        }
    };
    add_class(1, 1071);
    add_class(0, 3370);
    add_class(-1, 149);
    rng.shuffle(train);

    auto balanced = learn::smote(train, 5, 66);
    std::array<std::size_t, 3> counts{};
    for (const auto& e : balanced) ++counts[static_cast<std::size_t>(e.label + 1)];
    expect(counts[0] == 3370, "bad class balanced to " + str(counts[0]));
    expect(counts[1] == 3370, "average class balanced to " + str(counts[1]));
    expect(counts[2] == 3370, "good class balanced to " + str(counts[2]));

    std::vector<learn::FeatureVector> bad_orig, good_orig;
    for (const auto& e : train) {
        if (e.label == -1) bad_orig.push_back(e.features);
        if (e.label == 1) good_orig.push_back(e.features);
    }
    std::size_t checked = 0;
    for (std::size_t i = train.size(); i < balanced.size() && checked < 50; ++i, ++checked) {
        const auto& s = balanced[i];
        const auto& pool = s.label == -1 ? bad_orig : good_orig;
        bool found = false;
        for (std::size_t a = 0; a < pool.size() && !found; ++a) {
            for (std::size_t b = 0; b < pool.size() && !found; ++b) {
                if (a == b) continue;
                double u = -1.0;
                bool ok = true;
                for (int f = 0; f < learn::kFeatureCount && ok; ++f) {
                    auto fi = static_cast<std::size_t>(f);
                    double span = pool[b][fi] - pool[a][fi];
                    if (std::abs(span) > 1e-12) {
                        double candidate = (s.features[fi] - pool[a][fi]) / span;
                        if (u < 0.0 && candidate >= -1e-9) {
                            u = candidate;
                        } else if (std::abs(candidate - u) > 1e-9) {
                            ok = false;
                        }
                    } else if (std::abs(s.features[fi] - pool[a][fi]) > 1e-9) {
                        ok = false;
                    }
                }
                found = ok && u >= -1e-9 && u <= 1.0 + 1e-9;
            }
        }
        expect(found, "synthetic " + str(i) + " is not a convex combination of minority pairs");
    }
    expect(checked == 50, "expected 50 synthetic points to check, saw " + str(checked));
}

// ---------------------------------------------------------------------------
// 7. Classifier sanity on labels that are a function of two features.

void criterion_classifier() {
    Rng rng(7007);
    std::vector<learn::LabeledExample> examples;
    for (int i = 0; i < 3000; ++i) {
        learn::LabeledExample e;
        double streams = static_cast<double>(rng.bounded(10));
        double non_gaming = static_cast<double>(rng.bounded(2));
        e.features = {rng.uniform(0.0, 19999.0),
                      static_cast<double>(rng.bounded(20)),
                      streams,
                      rng.uniform(0.0, 9.0),
                      rng.uniform(0.0, 5.0),
                      rng.uniform(0.0, 3.0),
                      non_gaming,
                      static_cast<double>(rng.bounded(2))};
        if (streams >= 5.0 && non_gaming == 1.0) {
            e.label = 1;
        } else if (streams <= 1.0) {
            e.label = -1;
        } else {
            e.label = 0;
        }
        examples.push_back(e);
    }
    auto split = learn::split_train_test(examples, 0.8, 17);

    auto run = [&](int threads) {
        learn::ForestOptions options;
        options.n_threads = threads;
        auto model = learn::train_forest(split.train, 10, 100, 17, options);
        return learn::evaluate(model, split.test);
    };
    auto a = run(1);
    auto b = run(1);
    auto c = run(2);

    std::array<std::size_t, 3> class_counts{};
    for (const auto& e : split.test) ++class_counts[static_cast<std::size_t>(e.label + 1)];
    double baseline = static_cast<double>(
                          *std::max_element(class_counts.begin(), class_counts.end())) /
                      static_cast<double>(split.test.size());

    expect(a.accuracy >= 0.90, "test accuracy " + str(a.accuracy) + " below 0.90");
    expect(a.accuracy > baseline,
           "accuracy " + str(a.accuracy) + " does not beat the majority baseline " + str(baseline));
    auto same = [](const learn::EvalReport& x, const learn::EvalReport& y) {
        return x.accuracy == y.accuracy && x.macro_f1 == y.macro_f1 &&
               x.weighted_f1 == y.weighted_f1 && x.confusion == y.confusion;
    };
    expect(same(a, b), "identical seed produced different metrics across runs");
    expect(same(a, c), "identical seed produced different metrics across thread counts");
}

// ---------------------------------------------------------------------------
// 8. The report pipeline is byte-deterministic and emits the table analogs.

void criterion_pipeline_determinism() {
    const char* bin = std::getenv("CHANNELSCOPE_BIN");
    expect(bin != nullptr, "CHANNELSCOPE_BIN must point at the CLI binary");

    fs::path work = fs::temp_directory_path() / ("channelscope_acceptance_" + str(::getpid()));
    fs::remove_all(work);
    fs::create_directories(work);
    auto run = [&](const std::string& args) {
        std::string cmd = std::string(bin) + " " + args + " >/dev/null 2>&1";
        int status = std::system(cmd.c_str());
        expect(status != -1 && WEXITSTATUS(status) == 0, "command failed: " + cmd);
    };

    auto fixture = work / "fixture";
    run("synth --n 600 --seed 77 --out " + fixture.string());
    std::string inputs = " --input " + (fixture / "snapshots.jsonl").string() + " --games " +
                         (fixture / "game_popularity.csv").string() + " --seed 9 ";
    run("report" + inputs + "--out " + (work / "run1").string());
    run("report" + inputs + "--out " + (work / "run2").string());

    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(work / "run1")) {
        auto counterpart = work / "run2" / entry.path().filename();
        expect(fs::exists(counterpart), "second run is missing " + counterpart.string());
        expect(read_file(entry.path()) == read_file(counterpart),
               "artifact differs between runs: " + entry.path().filename().string());
        ++compared;
    }
    expect(compared >= 25, "expected a full artifact set, compared only " + str(compared));

    auto check_header = [&](const std::string& file, const std::string& header) {
        auto lines = lines_of(read_file(work / "run1" / file));
        expect(!lines.empty() && lines[0] == header,
               file + " header mismatch: got '" + (lines.empty() ? "" : lines[0]) + "'");
        return lines;
    };
    check_header("categories.csv", "category,followers_lo,followers_hi,n_users");
    check_header("bucket_averages.csv", "followers_lo,followers_hi,n_users,avg_followers_gained");
    auto class_lines = check_header("class_sizes.csv", "class,n_users");
    expect(class_lines.size() == 5, "class_sizes.csv should list 3 classes plus a total");
    auto sweep_lines = check_header("depth_sweep.csv",
                                    "max_depth,accuracy,macro_precision,macro_recall,macro_f1,"
                                    "weighted_precision,weighted_recall,weighted_f1");
    expect(sweep_lines.size() == 9, "depth sweep must have exactly 8 data rows, found " +
                                        str(sweep_lines.size() - 1));

    fs::remove_all(work);
}

// ---------------------------------------------------------------------------
// 9. Strategy comparison recovers a constructed 3x gain ratio.

void criterion_strategy_ratio() {
    Rng rng(9009);
    std::vector<cohort::StrategyInput> channels;
    for (int i = 0; i < 1000; ++i) {
        bool matcher = i % 20 == 0;  // 5% of the population follows the strategy
        cohort::StrategyInput input;
        input.stats.user_id = "s" + str(i);
        input.stats.initial_followers = 1000;
        std::int64_t base = 90 + static_cast<std::int64_t>(rng.bounded(21));
        input.stats.followers_gained_total = matcher ? 3 * base : base;
        input.stats.streams_per_week = matcher ? 6 : 2;
        input.stats.hours_per_week = 10.0;
        input.stats.has_gaming = true;
        input.stats.has_non_gaming = matcher;
        input.max_session_hours = matcher ? 3.0 : 8.0;
        input.viewer_hours = 500.0;
        channels.push_back(std::move(input));
    }
    auto cmp = cohort::compare_strategy(channels, cohort::StrategyCriteria{});
    expect(cmp.matching.has_value(), "no matching channels found");
    expect(cmp.matching->n == 50, "expected 50 matching channels, got " + str(cmp.matching->n));
    double ratio = cmp.matching->mean_gain / cmp.all.mean_gain;
    expect(ratio >= 2.5 && ratio <= 3.5,
           "matching/overall mean-gain ratio " + str(ratio) + " outside [2.5, 3.5]");
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<void()> fn;
    };
    const std::vector<Criterion> criteria = {
        {"bot detector: full recall, zero false flags, under 1s", criterion_bot_detector},
        {"step detector literal series", criterion_detector_literalness},
        {"power-law recovery at exponents 1.25 / 1.11 / 2.0", criterion_power_law},
        {"session and week-stats round trip on 1000 channels", criterion_session_round_trip},
        {"cohort rules match brute force; outlier invariants hold", criterion_cohort_rules},
        {"smote balances classes and stays on minority segments", criterion_smote},
        {"classifier sanity: accuracy, baseline, determinism", criterion_classifier},
        {"report pipeline byte-determinism and table schemas", criterion_pipeline_determinism},
        {"strategy comparison recovers the 3x construction", criterion_strategy_ratio},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].fn();
            std::printf("[PASS] criterion %zu: %s (%.2fs)\n", i + 1, criteria[i].name,
                        elapsed_seconds(start));
        } catch (const std::exception& e) {
            ++failures;
            std::printf("[FAIL] criterion %zu: %s -- %s\n", i + 1, criteria[i].name, e.what());
        }
        std::fflush(stdout);
    }
    if (failures) std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures;
}
