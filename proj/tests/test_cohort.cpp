#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "channelscope/cohort.hpp"
#include "channelscope/errors.hpp"
#include "channelscope/rng.hpp"

#include "test_util.hpp"

using namespace channelscope;
using namespace channelscope::cohort;
using testutil::snap_live;
using testutil::snap_offline;

namespace {

// Brute-force re-statements of the cohort rules, kept independent of the
// implementation on purpose.
const char* brute_category(std::int64_t f) {
    if (f >= 0 && f < 5000) return "small";
    if (f >= 5000 && f < 10000) return "medium";
    if (f >= 10000 && f < 100000) return "big";
    return "mega";
}

int brute_bucket(std::int64_t f) {
    for (int b = 0; b < 20; ++b) {
        if (f >= b * 1000 && f < (b + 1) * 1000) return b;
    }
    return -1;
}

int brute_label(std::int64_t gained, double bucket_avg) {
    if (gained < 0) return -1;
    if (static_cast<double>(gained) > bucket_avg) return 1;
    return 0;
}

ChannelWeekStats make_stats(const std::string& user, std::int64_t initial, std::int64_t gained) {
    ChannelWeekStats s;
    s.user_id = user;
    s.initial_followers = initial;
    s.followers_gained_total = gained;
    return s;
}

}  // namespace

TEST_CASE("categorize boundaries") {
    CHECK(categorize(0) == Category::small);
    CHECK(categorize(4999) == Category::small);
    CHECK(categorize(5000) == Category::medium);
    CHECK(categorize(9999) == Category::medium);
    CHECK(categorize(10000) == Category::big);
    CHECK(categorize(99999) == Category::big);
    CHECK(categorize(100000) == Category::mega);
    CHECK(categorize(150000) == Category::mega);
    CHECK_THROWS_AS(categorize(-1), ValidationError);
}

TEST_CASE("bucketize boundaries") {
    CHECK(bucketize(0).index == 0);
    CHECK(bucketize(999).index == 0);
    CHECK(bucketize(1000).index == 1);
    CHECK(bucketize(19999).index == 19);
    CHECK(bucketize(5500).lo == 5000);
    CHECK(bucketize(5500).hi == 6000);
    CHECK_THROWS_AS(bucketize(20000), ValidationError);
    CHECK_THROWS_AS(bucketize(-1), ValidationError);
}

TEST_CASE("categorize and bucketize agree with brute force") {
    Rng rng(555);
    for (int i = 0; i < 2000; ++i) {
        std::int64_t f = static_cast<std::int64_t>(rng.bounded(250000));
        CHECK(category_name(categorize(f)) == std::string(brute_category(f)));
        if (f < 20000) {
            CHECK(bucketize(f).index == brute_bucket(f));
            // Bucket/category consistency: buckets 0-4 are small, 5-9 medium.
            if (bucketize(f).index <= 4) CHECK(categorize(f) == Category::small);
            if (bucketize(f).index >= 5 && bucketize(f).index <= 9) {
                CHECK(categorize(f) == Category::medium);
            }
        }
    }
}

TEST_CASE("growth labels follow the precedence rules") {
    BucketAverages averages;
    averages.avg[0] = 33.39;  // supplied externally

    std::vector<ChannelWeekStats> channels = {
        make_stats("gains40", 500, 40),    // above the bucket average
        make_stats("loses5", 600, -5),     // net loss
        make_stats("exact", 700, 33),      // below average
    };
    auto labels = label_growth(channels, averages);
    REQUIRE(labels.size() == 3);
    CHECK(labels[0].cls == 1);
    CHECK(labels[1].cls == -1);
    CHECK(labels[2].cls == 0);
    CHECK(labels[0].bucket_avg == doctest::Approx(33.39));

    SUBCASE("gaining exactly the average is average, not good") {
        BucketAverages exact;
        exact.avg[0] = 40.0;
        auto l = label_growth(std::vector<ChannelWeekStats>{make_stats("u", 100, 40)}, exact);
        CHECK(l[0].cls == 0);
    }

    SUBCASE("negative gain is bad even far above the average") {
        BucketAverages neg;
        neg.avg[0] = -100.0;
        auto l = label_growth(std::vector<ChannelWeekStats>{make_stats("u", 100, -5)}, neg);
        CHECK(l[0].cls == -1);
    }
}

TEST_CASE("labels computed from the input averages partition the set") {
    Rng rng(556);
    std::vector<ChannelWeekStats> channels;
    for (int i = 0; i < 500; ++i) {
        channels.push_back(make_stats("u" + std::to_string(i),
                                      static_cast<std::int64_t>(rng.bounded(20000)),
                                      static_cast<std::int64_t>(rng.bounded(200)) - 20));
    }
    auto averages = bucket_gain_averages(channels);
    auto labels = label_growth(channels);
    REQUIRE(labels.size() == channels.size());
    std::size_t good = 0, avg = 0, bad = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        int b = bucketize(channels[i].initial_followers).index;
        CHECK(labels[i].cls == brute_label(channels[i].followers_gained_total,
                                           averages.avg[static_cast<std::size_t>(b)]));
        (labels[i].cls == 1 ? good : labels[i].cls == 0 ? avg : bad)++;
    }
    CHECK(good + avg + bad == channels.size());
    CHECK(good > 0);
    CHECK(bad > 0);
}

TEST_CASE("outlier isolation takes the ceiling per bucket") {
    SUBCASE("bucket of 40 yields 2 outliers") {
        std::vector<ChannelWeekStats> channels;
        for (int i = 0; i < 40; ++i) {
            channels.push_back(make_stats("u" + std::to_string(i), 100, i));
        }
        auto outliers = isolate_outliers(channels, 0.05);
        REQUIRE(outliers.size() == 2);
        CHECK(std::find(outliers.begin(), outliers.end(), "u39") != outliers.end());
        CHECK(std::find(outliers.begin(), outliers.end(), "u38") != outliers.end());
    }
    SUBCASE("a singleton bucket is its own outlier") {
        std::vector<ChannelWeekStats> channels = {make_stats("only", 1500, 3)};
        auto outliers = isolate_outliers(channels, 0.05);
        CHECK(outliers == std::vector<std::string>{"only"});
    }
    SUBCASE("ties at the cut break by user_id ascending") {
        std::vector<ChannelWeekStats> channels = {
            make_stats("b", 100, 10),
            make_stats("a", 100, 10),
            make_stats("c", 100, 10),
        };
        auto outliers = isolate_outliers(channels, 0.05);  // ceil(0.15) = 1
        CHECK(outliers == std::vector<std::string>{"a"});
    }
}

TEST_CASE("outlier size and dominance invariant on random channels") {
    Rng rng(557);
    std::vector<ChannelWeekStats> channels;
    for (int i = 0; i < 1000; ++i) {
        channels.push_back(make_stats("u" + std::to_string(1000 + i),
                                      static_cast<std::int64_t>(rng.bounded(20000)),
                                      static_cast<std::int64_t>(rng.bounded(500)) - 50));
    }
    auto outliers = isolate_outliers(channels, 0.05);
    std::set<std::string> outlier_set(outliers.begin(), outliers.end());

    std::array<std::vector<const ChannelWeekStats*>, 20> buckets;
    for (const auto& ch : channels) {
        buckets[static_cast<std::size_t>(bucketize(ch.initial_followers).index)].push_back(&ch);
    }
    std::size_t expected_total = 0;
    for (const auto& bucket : buckets) {
        if (bucket.empty()) continue;
        std::size_t expect = static_cast<std::size_t>(
            std::ceil(0.05 * static_cast<double>(bucket.size())));
        expected_total += expect;
        std::int64_t min_outlier_gain = std::numeric_limits<std::int64_t>::max();
        std::int64_t max_inlier_gain = std::numeric_limits<std::int64_t>::min();
        std::size_t found = 0;
        for (const auto* ch : bucket) {
            if (outlier_set.count(ch->user_id)) {
                ++found;
                min_outlier_gain = std::min(min_outlier_gain, ch->followers_gained_total);
            } else {
                max_inlier_gain = std::max(max_inlier_gain, ch->followers_gained_total);
            }
        }
        CHECK(found == expect);
        if (found < bucket.size()) CHECK(min_outlier_gain >= max_inlier_gain);
    }
    CHECK(outliers.size() == expected_total);
}

namespace {

// One channel with a single long session whose per-bin gain follows `gain`.
ChannelActivity channel_with_bin_gains(const std::string& user, const std::string& lang,
                                       int n_slots, std::int64_t (*gain)(int bin)) {
    std::vector<sessions::ChannelSnapshot> snaps;
    std::int64_t f = 1000;
    for (int k = 0; k <= n_slots; ++k) {
        snaps.push_back(snap_live(user, k, f, "s0", 10, "g1", "Game 1", lang, {"Game 1"}));
        f += gain(k % 48);
    }
    ChannelActivity act;
    act.sessions = sessions::build_sessions(snaps);
    act.gains = sessions::gain_series(snaps, act.sessions);
    ingest::ChannelProfile p;
    p.user_id = user;
    p.initial_followers = 1000;
    act.stats = sessions::week_stats(p, act.sessions, act.gains, {});
    return act;
}

}  // namespace

TEST_CASE("peak hours find concentrated gain bins") {
    // Gains only between 13:00 and 14:00 UTC (bins 26, 27).
    std::vector<ChannelActivity> channels;
    for (int c = 0; c < 3; ++c) {
        std::vector<sessions::ChannelSnapshot> snaps;
        std::string user = "u" + std::to_string(c);
        std::int64_t f = 500;
        for (int k = 20; k <= 34; ++k) {  // one session 10:00-17:30
            snaps.push_back(snap_live(user, k, f, "s0", 5, "g1", "Game 1", "en", {"Game 1"}));
            int bin = k % 48;
            if (bin == 26 || bin == 27) f += 100;
        }
        ChannelActivity act;
        act.sessions = sessions::build_sessions(snaps);
        act.gains = sessions::gain_series(snaps, act.sessions);
        ingest::ChannelProfile p{user, 500, 0, 0};
        act.stats = sessions::week_stats(p, act.sessions, act.gains, {});
        channels.push_back(std::move(act));
    }
    auto profile = peak_hours(channels, "en");
    REQUIRE(profile.has_value());
    CHECK(profile->peak_bins == std::vector<int>{26, 27});
    CHECK(profile->mean_gain[26] == doctest::Approx(100.0));
    CHECK(profile->mean_gain[27] == doctest::Approx(100.0));
}

TEST_CASE("uniform gains give an empty peak set") {
    std::vector<ChannelActivity> channels;
    channels.push_back(channel_with_bin_gains("u0", "en", 96, [](int) -> std::int64_t { return 10; }));
    auto profile = peak_hours(channels, "en");
    REQUIRE(profile.has_value());
    CHECK(profile->peak_bins.empty());
}

TEST_CASE("multi-peak versus single-peak language profiles") {
    std::vector<ChannelActivity> channels;
    // English: three separated peak windows.
    channels.push_back(channel_with_bin_gains("en0", "en", 96, [](int bin) -> std::int64_t {
        return (bin == 10 || bin == 11 || bin == 32 || bin == 40) ? 300 : 10;
    }));
    // Spanish: one early-afternoon window.
    channels.push_back(channel_with_bin_gains("es0", "es", 96, [](int bin) -> std::int64_t {
        return (bin == 26 || bin == 27) ? 300 : 10;
    }));

    auto en = peak_hours(channels, "en");
    auto es = peak_hours(channels, "es");
    REQUIRE(en.has_value());
    REQUIRE(es.has_value());
    CHECK(en->peak_bins == std::vector<int>{10, 11, 32, 40});
    CHECK(es->peak_bins == std::vector<int>{26, 27});

    auto regions = [](const std::vector<int>& bins) {
        int n = 0;
        for (std::size_t i = 0; i < bins.size(); ++i) {
            if (i == 0 || bins[i] != bins[i - 1] + 1) ++n;
        }
        return n;
    };
    CHECK(regions(en->peak_bins) == 3);
    CHECK(regions(es->peak_bins) == 1);
}

TEST_CASE("peak hours of an absent language is empty") {
    std::vector<ChannelActivity> channels;
    channels.push_back(channel_with_bin_gains("u0", "en", 48, [](int) -> std::int64_t { return 5; }));
    CHECK_FALSE(peak_hours(channels, "fr").has_value());
}

TEST_CASE("peak hour means are invariant under channel order") {
    std::vector<ChannelActivity> channels;
    for (int c = 0; c < 6; ++c) {
        channels.push_back(channel_with_bin_gains("u" + std::to_string(c), "en", 80,
                                                  [](int bin) -> std::int64_t {
                                                      return bin % 5 == 0 ? 50 : 7;
                                                  }));
    }
    auto baseline = peak_hours(channels, "en");
    Rng rng(558);
    for (int trial = 0; trial < 3; ++trial) {
        rng.shuffle(channels);
        auto profile = peak_hours(channels, "en");
        REQUIRE(profile.has_value());
        for (int b = 0; b < 48; ++b) {
            CHECK(profile->mean_gain[static_cast<std::size_t>(b)] ==
                  doctest::Approx(baseline->mean_gain[static_cast<std::size_t>(b)]));
        }
    }
}

namespace {

sessions::StreamSession session_with_tag(const std::string& tag, double hours = 1.0,
                                         double avg_viewers = 10.0) {
    sessions::StreamSession s;
    s.user_id = "u";
    s.stream_id = "s";
    s.duration_hours = hours;
    s.avg_viewers = avg_viewers;
    s.tags = {tag};
    s.language = "en";
    return s;
}

}  // namespace

TEST_CASE("content split classifies by primary tag") {
    auto tags = sessions::default_non_gaming_tags();

    SUBCASE("all chatting") {
        std::vector<sessions::StreamSession> streams(4, session_with_tag("Just Chatting"));
        auto split = content_split(streams, tags);
        CHECK(split.gaming_pct == doctest::Approx(0.0));
        CHECK(split.non_gaming_pct == doctest::Approx(100.0));
    }
    SUBCASE("7 gaming, 3 chat") {
        std::vector<sessions::StreamSession> streams;
        for (int i = 0; i < 7; ++i) streams.push_back(session_with_tag("Game X"));
        for (int i = 0; i < 3; ++i) streams.push_back(session_with_tag("Just Chatting"));
        auto split = content_split(streams, tags);
        CHECK(split.gaming_pct == doctest::Approx(70.0));
        CHECK(split.non_gaming_pct == doctest::Approx(30.0));
        CHECK(split.gaming_pct + split.non_gaming_pct == doctest::Approx(100.0));
    }
    SUBCASE("empty tag set is an error") {
        std::vector<sessions::StreamSession> streams = {session_with_tag("Game X")};
        CHECK_THROWS_AS(content_split(streams, {}), ValidationError);
    }
}

namespace {

StrategyInput strategy_channel(const std::string& user, int streams, double max_hours, bool mixed,
                               std::int64_t gained, double hours_per_week = 10.0) {
    StrategyInput input;
    input.stats = make_stats(user, 1000, gained);
    input.stats.streams_per_week = streams;
    input.stats.hours_per_week = hours_per_week;
    input.stats.has_gaming = true;
    input.stats.has_non_gaming = mixed;
    input.max_session_hours = max_hours;
    input.viewer_hours = 100.0;
    return input;
}

}  // namespace

TEST_CASE("strategy matching criteria") {
    StrategyCriteria criteria;  // >=5 streams, <=5h, mixed content
    CHECK(matches_strategy(strategy_channel("u", 5, 4.0, true, 10), criteria));
    CHECK_FALSE(matches_strategy(strategy_channel("u", 4, 4.0, true, 10), criteria));
    CHECK_FALSE(matches_strategy(strategy_channel("u", 5, 5.5, true, 10), criteria));
    CHECK_FALSE(matches_strategy(strategy_channel("u", 5, 4.0, false, 10), criteria));

    criteria.require_mixed_content = false;
    CHECK(matches_strategy(strategy_channel("u", 5, 4.0, false, 10), criteria));

    criteria.min_hours_per_week = 40.0;
    CHECK_FALSE(matches_strategy(strategy_channel("u", 5, 4.0, false, 10, 30.0), criteria));
    CHECK(matches_strategy(strategy_channel("u", 5, 4.0, false, 10, 45.0), criteria));
}

TEST_CASE("strategy comparison recovers a constructed 3x gain ratio") {
    Rng rng(559);
    std::vector<StrategyInput> channels;
    for (int i = 0; i < 1000; ++i) {
        bool matcher = i < 50;
        std::int64_t base = 90 + static_cast<std::int64_t>(rng.bounded(21));  // ~100
        std::int64_t gained = matcher ? base * 3 : base;
        channels.push_back(strategy_channel("u" + std::to_string(i), matcher ? 6 : 2,
                                            matcher ? 3.0 : 8.0, matcher, gained));
    }
    auto cmp = compare_strategy(channels, {});
    REQUIRE(cmp.matching.has_value());
    CHECK(cmp.matching->n == 50);
    double ratio = cmp.matching->mean_gain / cmp.all.mean_gain;
    CHECK(ratio > 2.5);
    CHECK(ratio < 3.5);
    CHECK(cmp.matching->median_gain > cmp.all.median_gain);
}

TEST_CASE("no matching channel leaves the matching column empty") {
    std::vector<StrategyInput> channels = {strategy_channel("u", 1, 20.0, false, 5)};
    StrategyCriteria impossible;
    impossible.min_streams_per_week = 50;
    auto cmp = compare_strategy(channels, impossible);
    CHECK(cmp.all.n == 1);
    CHECK_FALSE(cmp.matching.has_value());
}

TEST_CASE("make_strategy_input aggregates sessions") {
    std::vector<sessions::StreamSession> ss = {session_with_tag("Game X", 2.0, 30.0),
                                               session_with_tag("Game Y", 4.0, 10.0)};
    auto input = make_strategy_input(make_stats("u", 100, 5), ss);
    CHECK(input.max_session_hours == doctest::Approx(4.0));
    CHECK(input.viewer_hours == doctest::Approx(2.0 * 30.0 + 4.0 * 10.0));
}

TEST_CASE("cohort csv exports carry the table layouts") {
    testutil::TempDir dir("cohort_csv");

    std::vector<ingest::ChannelProfile> profiles = {
        {"u1", 100, 0, 0}, {"u2", 7000, 0, 0}, {"u3", 50000, 0, 0}, {"u4", 150000, 0, 0}};
    write_categories_csv(profiles, dir / "categories.csv");
    auto text = testutil::read_text(dir / "categories.csv");
    CHECK(text.rfind("category,followers_lo,followers_hi,n_users\n", 0) == 0);
    CHECK(text.find("small,0,5000,1") != std::string::npos);
    CHECK(text.find("mega,100000,,1") != std::string::npos);

    std::vector<ChannelWeekStats> channels = {make_stats("u1", 100, 40)};
    auto averages = bucket_gain_averages(channels);
    write_bucket_averages_csv(averages, dir / "avg.csv");
    text = testutil::read_text(dir / "avg.csv");
    CHECK(text.rfind("followers_lo,followers_hi,n_users,avg_followers_gained\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 21);  // header + 20 buckets

    auto labels = label_growth(channels, averages);
    write_labels_csv(channels, labels, dir / "labels.csv");
    text = testutil::read_text(dir / "labels.csv");
    CHECK(text.rfind("user_id,bucket,followers_gained,bucket_avg,label\n", 0) == 0);

    auto split = content_split(std::vector<sessions::StreamSession>{session_with_tag("Game X")},
                               sessions::default_non_gaming_tags());
    write_content_split_csv(split, split, dir / "content.csv");
    text = testutil::read_text(dir / "content.csv");
    CHECK(text.rfind("content,entire_dataset_pct,outliers_pct\n", 0) == 0);

    auto cmp = compare_strategy(std::vector<StrategyInput>{strategy_channel("u", 6, 3.0, true, 9)},
                                {});
    write_strategy_csv(cmp, dir / "strategy.csv");
    text = testutil::read_text(dir / "strategy.csv");
    CHECK(text.rfind("metric,entire_dataset,strategy_matching\n", 0) == 0);
    CHECK(text.find("avg_followers_gained") != std::string::npos);
    CHECK(text.find("median_followers_gained") != std::string::npos);
    CHECK(text.find("avg_viewers_per_hour") != std::string::npos);
}
