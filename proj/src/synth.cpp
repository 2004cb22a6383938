#include "channelscope/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "channelscope/errors.hpp"
#include "channelscope/rng.hpp"

namespace channelscope::synth {

namespace {

constexpr int kSlots = static_cast<int>(kSlotsPerWeek);  // 336 snapshots per observed week

const std::vector<std::string>& non_gaming_categories() {
    static const std::vector<std::string> cats(sessions::default_non_gaming_tags().begin(),
                                               sessions::default_non_gaming_tags().end());
    return cats;
}

std::string game_id_of(int g) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "g%03d", g);
    return buf;
}

std::string game_name_of(int g) { return "Game " + std::to_string(g); }

// Hour-of-day gain multipliers; a few languages get pronounced peak windows
// so the peak-hour analysis has structure to find.
double language_multiplier(const std::string& language, int bin) {
    if (language == "en") {
        if (bin == 10 || bin == 11 || bin == 32 || bin == 40) return 3.0;
    } else if (language == "es") {
        if (bin == 26 || bin == 27) return 3.0;
    } else {
        if (bin == 36) return 2.0;
    }
    return 1.0;
}

}  // namespace

void SynthConfig::validate() const {
    if (n_channels < 1) throw ValidationError("n_channels must be >= 1");
    if (!(follower_alpha > 1.0)) throw ValidationError("follower_alpha must be > 1");
    if (!(follower_xmin > 0.0)) throw ValidationError("follower_xmin must be positive");
    if (weeks < 1) throw ValidationError("weeks must be >= 1");
    if (bot_rate < 0.0 || bot_rate > 1.0) throw ValidationError("bot_rate must be in [0, 1]");
    if (bad_channel_rate < 0.0 || bad_channel_rate > 1.0 || strategist_rate < 0.0 ||
        strategist_rate > 1.0 || non_gaming_rate < 0.0 || non_gaming_rate > 1.0) {
        throw ValidationError("behavior rates must be in [0, 1]");
    }
    if (!(bot_magnitude_ratio >= 1.0)) throw ValidationError("bot_magnitude_ratio must be >= 1");
    if (max_streams_per_week < 0) throw ValidationError("max_streams_per_week must be >= 0");
    if (n_games < 1) throw ValidationError("n_games must be >= 1");
    if (popular_top_k < 0 || popular_top_k > n_games) {
        throw ValidationError("popular_top_k must be in [0, n_games]");
    }
    if (language_mix.empty()) throw ValidationError("language_mix must not be empty");
    double total = 0.0;
    for (const auto& [lang, fraction] : language_mix) {
        if (lang.empty() || fraction < 0.0) throw ValidationError("bad language_mix entry");
        total += fraction;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("language fractions must sum to 1");
    if (floor_to_slot(start_ts) != start_ts) throw ValidationError("start_ts must be grid-aligned");
}

Population generate_population(const SynthConfig& config) {
    config.validate();
    Population pop;
    pop.config = config;
    pop.channels.reserve(static_cast<std::size_t>(config.n_channels));

    const auto f_floor = static_cast<std::int64_t>(std::ceil(config.follower_xmin));

    for (int i = 0; i < config.n_channels; ++i) {
        Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(i)));
        ChannelTruth ch;
        char uid[16];
        std::snprintf(uid, sizeof(uid), "u%05d", i);
        ch.profile.user_id = uid;
        ch.week = config.weeks > 1 ? i % config.weeks : 0;

        // Inverse-transform power-law draw for the initial follower count.
        double u = rng.uniform();
        double x = config.follower_xmin * std::pow(1.0 - u, -1.0 / (config.follower_alpha - 1.0));
        ch.profile.initial_followers = std::max(f_floor, static_cast<std::int64_t>(std::llround(
                                                             std::min(x, 1e15))));
        ch.profile.video_count = static_cast<std::int64_t>(rng.bounded(40));
        ch.profile.clip_count = static_cast<std::int64_t>(rng.bounded(60));

        double pick = rng.uniform();
        ch.language = config.language_mix.back().first;
        double cumulative = 0.0;
        for (const auto& [lang, fraction] : config.language_mix) {
            cumulative += fraction;
            if (pick < cumulative) {
                ch.language = lang;
                break;
            }
        }
        ch.bad = rng.uniform() < config.bad_channel_rate;
        ch.strategist = !ch.bad && rng.uniform() < config.strategist_rate;

        const Timestamp week_start = config.start_ts + static_cast<std::int64_t>(ch.week) *
                                                           kSlots * kSecondsPerSlot;

        // Session schedule: one session per equal segment of the week, at
        // least 2 slots long, never at slot 0 and never touching a neighbor.
        // Strategists always stream 5-7 short sessions with mixed content.
        int n_streams = ch.strategist
                            ? 5 + static_cast<int>(rng.bounded(3))
                            : static_cast<int>(rng.bounded(
                                  static_cast<std::uint64_t>(config.max_streams_per_week + 1)));
        if (n_streams > 0) {
            int segment = (kSlots - 2) / n_streams;  // slots [1, 335) partitioned
            if (segment < 3) {
                n_streams = (kSlots - 2) / 3;
                segment = (kSlots - 2) / n_streams;
            }
            for (int s = 0; s < n_streams; ++s) {
                TruthSession session;
                int max_duration = ch.strategist ? 9 : std::min(24, segment - 1);
                session.duration_slots =
                    2 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(max_duration - 1)));
                int segment_start = 1 + s * segment;
                int slack = segment - 1 - session.duration_slots;
                session.start_slot =
                    segment_start + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(slack + 1)));
                session.stream_id = ch.profile.user_id + "_s" + std::to_string(s);
                bool non_gaming = ch.strategist ? s % 2 == 1 : rng.uniform() < config.non_gaming_rate;
                if (non_gaming) {
                    const auto& cats = non_gaming_categories();
                    auto c = static_cast<std::size_t>(rng.bounded(cats.size()));
                    session.tag = cats[c];
                    session.game_id = "ng" + std::to_string(c);
                    session.game_name = cats[c];
                } else {
                    int g = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(config.n_games)));
                    session.game_id = game_id_of(g);
                    session.game_name = game_name_of(g);
                    session.tag = session.game_name;
                }
                session.start_ts = week_start + static_cast<std::int64_t>(session.start_slot) *
                                                    kSecondsPerSlot;
                session.end_ts = session.start_ts + static_cast<std::int64_t>(session.duration_slots) *
                                                        kSecondsPerSlot;
                std::int64_t start_v = std::max<std::int64_t>(
                    1, std::llround(static_cast<double>(ch.profile.initial_followers) * 0.01 *
                                    rng.uniform(0.5, 1.5)));
                double viewer_sum = 0.0;
                for (int t = 0; t < session.duration_slots; ++t) {
                    std::int64_t v = t == 0 ? start_v
                                            : std::max<std::int64_t>(
                                                  1, std::llround(static_cast<double>(start_v) *
                                                                  rng.uniform(0.8, 1.2)));
                    session.viewers.push_back(v);
                    viewer_sum += static_cast<double>(v);
                }
                session.start_viewers = start_v;
                session.avg_viewers = viewer_sum / static_cast<double>(session.duration_slots);
                ch.sessions.push_back(std::move(session));
            }
        }

        // Realize per-step follower deltas. Active windows are shifted one
        // slot early so the gain lands inside the session under the landing-
        // slot attribution rule.
        ch.deltas.assign(kSlots - 1, 0);
        const double base = std::max(
            1.0, 0.15 * std::sqrt(static_cast<double>(ch.profile.initial_followers)) *
                     rng.uniform(0.5, 2.0) * (ch.strategist ? 3.0 : 1.0));
        if (ch.bad) {
            for (auto& d : ch.deltas) d = -1 - static_cast<std::int64_t>(rng.bounded(2));
        } else {
            for (const TruthSession& session : ch.sessions) {
                for (int t = session.start_slot - 1; t < session.start_slot + session.duration_slots - 1;
                     ++t) {
                    int bin = static_cast<int>(
                        ((week_start + static_cast<std::int64_t>(t) * kSecondsPerSlot) % 86400) /
                        kSecondsPerSlot);
                    double mult = language_multiplier(ch.language, bin);
                    ch.deltas[static_cast<std::size_t>(t)] = std::max<std::int64_t>(
                        1, std::llround(base * mult * rng.uniform(0.8, 1.2)));
                }
            }
        }
        // Clamp so followers never go negative; deltas store realized values.
        std::int64_t followers = ch.profile.initial_followers;
        for (auto& d : ch.deltas) {
            if (d < -followers) d = -followers;
            followers += d;
        }

        // Ground-truth aggregates, mirroring the week-stats definitions.
        for (TruthSession& session : ch.sessions) {
            std::int64_t gained = 0;
            for (int t = session.start_slot - 1;
                 t < session.start_slot + session.duration_slots - 1; ++t) {
                gained += ch.deltas[static_cast<std::size_t>(t)];
            }
            session.followers_gained = gained;
        }
        sessions::ChannelWeekStats& stats = ch.week_stats;
        stats.user_id = ch.profile.user_id;
        stats.initial_followers = ch.profile.initial_followers;
        stats.streams_per_week = static_cast<int>(ch.sessions.size());
        for (const TruthSession& session : ch.sessions) {
            double hours = static_cast<double>(session.duration_slots) * 0.5;
            stats.hours_per_week += hours;
            if (hours < 5.0) {
                ++stats.n_streams_lt5h;
            } else if (hours < 10.0) {
                ++stats.n_streams_5to10h;
            } else {
                ++stats.n_streams_gt10h;
            }
            bool non_gaming = sessions::default_non_gaming_tags().count(session.tag) > 0;
            (non_gaming ? stats.has_non_gaming : stats.has_gaming) = true;
            stats.followers_gained_active += session.followers_gained;
        }
        for (std::int64_t d : ch.deltas) stats.followers_gained_total += d;
        stats.followers_gained_inactive = stats.followers_gained_total - stats.followers_gained_active;
        stats.language = ch.sessions.empty() ? "" : ch.language;
        pop.channels.push_back(std::move(ch));
    }

    // Daily popularity table: fixed ranks, game g is rank g+1 every day.
    for (int day = 0; day < config.weeks * 7; ++day) {
        for (int g = 0; g < config.n_games; ++g) {
            ingest::GamePopularityRecord rec;
            rec.date = config.start_ts + static_cast<std::int64_t>(day) * 86400;
            rec.game_id = game_id_of(g);
            rec.rank = g + 1;
            rec.viewers = static_cast<std::int64_t>(config.n_games - g) * 1000;
            pop.game_popularity.push_back(std::move(rec));
        }
    }
    pop.popular_games = ingest::top_popular_games(pop.game_popularity, config.popular_top_k);

    // played_popular_game needs the popular set; fill it in now.
    for (ChannelTruth& ch : pop.channels) {
        for (const TruthSession& session : ch.sessions) {
            if (pop.popular_games.count(session.game_id)) {
                ch.week_stats.played_popular_game = true;
                break;
            }
        }
    }
    return pop;
}

std::vector<ingest::ChannelSnapshot> generate_snapshots(const Population& population) {
    const SynthConfig& config = population.config;

    // Per-channel follower level at every slot.
    std::vector<std::vector<std::int64_t>> followers(population.channels.size());
    for (std::size_t c = 0; c < population.channels.size(); ++c) {
        const ChannelTruth& ch = population.channels[c];
        followers[c].resize(kSlots);
        followers[c][0] = ch.profile.initial_followers;
        for (int k = 0; k + 1 < kSlots; ++k) {
            followers[c][static_cast<std::size_t>(k) + 1] =
                followers[c][static_cast<std::size_t>(k)] + ch.deltas[static_cast<std::size_t>(k)];
        }
    }

    std::vector<ingest::ChannelSnapshot> log;
    log.reserve(population.channels.size() * kSlots);
    for (int week = 0; week < config.weeks; ++week) {
        for (int k = 0; k < kSlots; ++k) {
            Timestamp ts = config.start_ts +
                           (static_cast<std::int64_t>(week) * kSlots + k) * kSecondsPerSlot;
            for (std::size_t c = 0; c < population.channels.size(); ++c) {
                const ChannelTruth& ch = population.channels[c];
                if (ch.week != week) continue;
                ingest::ChannelSnapshot snap;
                snap.ts = ts;
                snap.user_id = ch.profile.user_id;
                snap.followers = followers[c][static_cast<std::size_t>(k)];
                snap.language = ch.language;
                for (const TruthSession& session : ch.sessions) {
                    if (k >= session.start_slot && k < session.start_slot + session.duration_slots) {
                        snap.live = true;
                        snap.stream_id = session.stream_id;
                        snap.viewers = session.viewers[static_cast<std::size_t>(k - session.start_slot)];
                        snap.game_id = session.game_id;
                        snap.game_name = session.game_name;
                        snap.tags = {session.tag};
                        break;
                    }
                }
                log.push_back(std::move(snap));
            }
        }
    }
    return log;
}

InjectionResult inject_bot_anomalies(const std::vector<ingest::ChannelSnapshot>& log,
                                     const SynthConfig& config) {
    config.validate();
    InjectionResult result;
    result.log = log;

    std::map<std::string, std::vector<std::size_t>> by_user;
    for (std::size_t i = 0; i < result.log.size(); ++i) {
        by_user[result.log[i].user_id].push_back(i);
    }
    std::vector<std::string> users;
    users.reserve(by_user.size());
    for (const auto& [user, idx] : by_user) users.push_back(user);

    const auto target = static_cast<std::size_t>(
        std::llround(config.bot_rate * static_cast<double>(users.size())));
    if (target == 0) return result;

    Rng rng(derive_seed(config.seed, 0xB0715CADULL));
    rng.shuffle(users);

    for (const std::string& user : users) {
        if (result.tainted_users.size() >= target) break;
        const auto& idx = by_user[user];
        if (idx.size() < 4) {
            result.skipped_users.push_back(user);
            continue;
        }
        const std::size_t n = idx.size();
        std::int64_t max_delta = 1;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            std::int64_t d = result.log[idx[k + 1]].followers - result.log[idx[k]].followers;
            max_delta = std::max(max_delta, std::abs(d));
        }
        // Delta index j is eligible for flagging when 1 <= j <= n-3.
        auto j = static_cast<std::size_t>(1 + rng.bounded(n - 3));
        const auto step = static_cast<std::int64_t>(
            std::ceil(config.bot_magnitude_ratio * static_cast<double>(max_delta)));
        std::int64_t min_tail_followers = result.log[idx[j + 1]].followers;
        for (std::size_t k = j + 1; k < n; ++k) {
            min_tail_followers = std::min(min_tail_followers, result.log[idx[k]].followers);
        }
        const bool decline = rng.uniform() < 0.5 && min_tail_followers >= step;
        for (std::size_t k = j + 1; k < n; ++k) {
            result.log[idx[k]].followers += decline ? -step : step;
        }
        result.tainted_users.push_back(user);
        result.injected_delta[user] = j;
    }
    std::sort(result.tainted_users.begin(), result.tainted_users.end());
    std::sort(result.skipped_users.begin(), result.skipped_users.end());
    return result;
}

}  // namespace channelscope::synth
