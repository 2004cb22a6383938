#include "channelscope/learn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

#include <json.hpp>

#include "channelscope/cohort.hpp"
#include "channelscope/csv.hpp"
#include "channelscope/rng.hpp"

namespace channelscope::learn {

namespace {

constexpr int kClasses = 3;

int class_index(int label) { return label + 1; }
int class_label(int index) { return index - 1; }

}  // namespace

FeatureVector extract_features(const ChannelWeekStats& stats) {
    int bucket = cohort::bucketize(stats.initial_followers).index;
    return FeatureVector{
        static_cast<double>(stats.initial_followers),
        static_cast<double>(bucket),
        static_cast<double>(stats.streams_per_week),
        static_cast<double>(stats.n_streams_lt5h),
        static_cast<double>(stats.n_streams_5to10h),
        static_cast<double>(stats.n_streams_gt10h),
        stats.has_non_gaming ? 1.0 : 0.0,
        stats.played_popular_game ? 1.0 : 0.0,
    };
}

SplitResult split_train_test(std::span<const LabeledExample> examples, double train_fraction,
                             std::uint64_t seed) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
        throw ValidationError("train_fraction must be in (0, 1)");
    }
    std::array<std::vector<std::size_t>, kClasses> per_class;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        per_class[static_cast<std::size_t>(class_index(examples[i].label))].push_back(i);
    }
    Rng rng(seed);
    SplitResult result;
    for (int c = 0; c < kClasses; ++c) {
        auto& members = per_class[static_cast<std::size_t>(c)];
        if (members.empty()) continue;
        if (members.size() < 2) {
            throw StratificationError("class " + std::to_string(class_label(c)) +
                                      " has fewer than 2 members");
        }
        rng.shuffle(members);
        auto n_train = static_cast<std::size_t>(
            std::lround(train_fraction * static_cast<double>(members.size())));
        n_train = std::min(std::max<std::size_t>(n_train, 1), members.size() - 1);
        for (std::size_t i = 0; i < members.size(); ++i) {
            (i < n_train ? result.train : result.test).push_back(examples[members[i]]);
        }
    }
    rng.shuffle(result.train);
    rng.shuffle(result.test);
    return result;
}

std::vector<LabeledExample> smote(std::span<const LabeledExample> train, int k,
                                  std::uint64_t seed) {
    if (k < 1) throw ValidationError("smote k must be >= 1");
    std::array<std::vector<const LabeledExample*>, kClasses> per_class;
    for (const LabeledExample& ex : train) {
        per_class[static_cast<std::size_t>(class_index(ex.label))].push_back(&ex);
    }
    std::size_t majority = 0;
    for (const auto& members : per_class) majority = std::max(majority, members.size());

    std::vector<LabeledExample> balanced(train.begin(), train.end());
    Rng rng(seed);
    for (int c = 0; c < kClasses; ++c) {
        const auto& members = per_class[static_cast<std::size_t>(c)];
        if (members.empty() || members.size() == majority) continue;
        if (members.size() < 2) {
            throw OversampleError("class " + std::to_string(class_label(c)) +
                                  " has a single member; no neighbor to interpolate toward");
        }
        const int k_eff = std::min<int>(k, static_cast<int>(members.size()) - 1);

        // k nearest same-class neighbors per member, ties by index.
        std::vector<std::vector<std::size_t>> neighbors(members.size());
        for (std::size_t i = 0; i < members.size(); ++i) {
            std::vector<std::pair<double, std::size_t>> dist;
            dist.reserve(members.size() - 1);
            for (std::size_t j = 0; j < members.size(); ++j) {
                if (j == i) continue;
                double d2 = 0.0;
                for (int f = 0; f < kFeatureCount; ++f) {
                    double diff = members[i]->features[static_cast<std::size_t>(f)] -
                                  members[j]->features[static_cast<std::size_t>(f)];
                    d2 += diff * diff;
                }
                dist.emplace_back(d2, j);
            }
            std::sort(dist.begin(), dist.end());
            neighbors[i].reserve(static_cast<std::size_t>(k_eff));
            for (int n = 0; n < k_eff; ++n) neighbors[i].push_back(dist[static_cast<std::size_t>(n)].second);
        }
        for (std::size_t need = majority - members.size(); need > 0; --need) {
            auto i = static_cast<std::size_t>(rng.bounded(members.size()));
            auto nn = neighbors[i][static_cast<std::size_t>(rng.bounded(static_cast<std::uint64_t>(k_eff)))];
            double u = rng.uniform();
            LabeledExample synthetic;
            synthetic.label = class_label(c);
            for (int f = 0; f < kFeatureCount; ++f) {
                auto fi = static_cast<std::size_t>(f);
                double a = members[i]->features[fi];
                double b = members[nn]->features[fi];
                synthetic.features[fi] = a + u * (b - a);
            }
            balanced.push_back(synthetic);
        }
    }
    return balanced;
}

int DecisionTree::predict(const FeatureVector& x) const {
    std::int32_t node = 0;
    for (;;) {
        const Node& n = nodes[static_cast<std::size_t>(node)];
        if (n.feature < 0) return n.label;
        node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
}

int DecisionTree::depth() const {
    // Iterative depth over the index-linked nodes.
    std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
    int depth = 0;
    while (!stack.empty()) {
        auto [idx, d] = stack.back();
        stack.pop_back();
        const Node& n = nodes[static_cast<std::size_t>(idx)];
        depth = std::max(depth, d);
        if (n.feature >= 0) {
            stack.push_back({n.left, d + 1});
            stack.push_back({n.right, d + 1});
        }
    }
    return depth;
}

int ForestModel::predict(const FeatureVector& x) const {
    std::array<int, kClasses> votes{};
    for (const DecisionTree& tree : trees) {
        ++votes[static_cast<std::size_t>(class_index(tree.predict(x)))];
    }
    int best = 0;
    for (int c = 1; c < kClasses; ++c) {
        if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
    }
    return class_label(best);
}

namespace {

struct TreeBuilder {
    std::span<const LabeledExample> data;
    int max_depth;
    int features_per_split;
    Rng rng;
    DecisionTree tree;

    explicit TreeBuilder(std::span<const LabeledExample> d, int depth, int fps, std::uint64_t seed)
        : data(d), max_depth(depth), features_per_split(fps), rng(seed) {}

    static double gini(const std::array<std::int64_t, kClasses>& counts, std::int64_t total) {
        if (total == 0) return 0.0;
        double g = 1.0;
        for (std::int64_t c : counts) {
            double p = static_cast<double>(c) / static_cast<double>(total);
            g -= p * p;
        }
        return g;
    }

    static int majority(const std::array<std::int64_t, kClasses>& counts) {
        int best = 0;
        for (int c = 1; c < kClasses; ++c) {
            if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
        }
        return class_label(best);
    }

    std::int32_t build(std::vector<std::size_t>& indices, int depth) {
        std::array<std::int64_t, kClasses> counts{};
        for (std::size_t i : indices) ++counts[static_cast<std::size_t>(class_index(data[i].label))];
        const auto total = static_cast<std::int64_t>(indices.size());

        auto make_leaf = [&] {
            auto id = static_cast<std::int32_t>(tree.nodes.size());
            DecisionTree::Node leaf;
            leaf.label = majority(counts);
            tree.nodes.push_back(leaf);
            return id;
        };

        const double node_gini = gini(counts, total);
        if (depth >= max_depth || node_gini == 0.0 || indices.size() < 2) return make_leaf();

        // Candidate features: a random subset, evaluated in ascending index
        // order so equal gains resolve to the lowest feature.
        std::array<int, kFeatureCount> pool;
        for (int f = 0; f < kFeatureCount; ++f) pool[static_cast<std::size_t>(f)] = f;
        const int n_candidates = std::min(features_per_split, kFeatureCount);
        for (int i = 0; i < n_candidates; ++i) {
            auto j = static_cast<std::size_t>(i) +
                     static_cast<std::size_t>(rng.bounded(static_cast<std::uint64_t>(kFeatureCount - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        }
        std::sort(pool.begin(), pool.begin() + n_candidates);

        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::pair<double, int>> column(indices.size());
        for (int ci = 0; ci < n_candidates; ++ci) {
            int f = pool[static_cast<std::size_t>(ci)];
            for (std::size_t i = 0; i < indices.size(); ++i) {
                column[i] = {data[indices[i]].features[static_cast<std::size_t>(f)],
                             class_index(data[indices[i]].label)};
            }
            std::sort(column.begin(), column.end());
            std::array<std::int64_t, kClasses> left{};
            std::int64_t n_left = 0;
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                ++left[static_cast<std::size_t>(column[i].second)];
                ++n_left;
                if (column[i].first == column[i + 1].first) continue;
                std::array<std::int64_t, kClasses> right;
                for (int c = 0; c < kClasses; ++c) {
                    right[static_cast<std::size_t>(c)] =
                        counts[static_cast<std::size_t>(c)] - left[static_cast<std::size_t>(c)];
                }
                std::int64_t n_right = total - n_left;
                double weighted =
                    (static_cast<double>(n_left) * gini(left, n_left) +
                     static_cast<double>(n_right) * gini(right, n_right)) /
                    static_cast<double>(total);
                double gain = node_gini - weighted;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = column[i].first + (column[i + 1].first - column[i].first) / 2.0;
                }
            }
        }
        if (best_feature < 0) return make_leaf();

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : indices) {
            double v = data[i].features[static_cast<std::size_t>(best_feature)];
            (v <= best_threshold ? left_idx : right_idx).push_back(i);
        }
        if (left_idx.empty() || right_idx.empty()) return make_leaf();
        indices.clear();
        indices.shrink_to_fit();

        auto id = static_cast<std::int32_t>(tree.nodes.size());
        DecisionTree::Node node;
        node.feature = best_feature;
        node.threshold = best_threshold;
        tree.nodes.push_back(node);
        auto left_id = build(left_idx, depth + 1);
        auto right_id = build(right_idx, depth + 1);
        tree.nodes[static_cast<std::size_t>(id)].left = left_id;
        tree.nodes[static_cast<std::size_t>(id)].right = right_id;
        return id;
    }
};

DecisionTree build_tree(std::span<const LabeledExample> train, int max_depth,
                        int features_per_split, std::uint64_t seed) {
    TreeBuilder builder(train, max_depth, features_per_split, seed);
    std::vector<std::size_t> bootstrap(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        bootstrap[i] = static_cast<std::size_t>(builder.rng.bounded(train.size()));
    }
    builder.build(bootstrap, 0);
    return std::move(builder.tree);
}

}  // namespace

ForestModel train_forest(std::span<const LabeledExample> train, int max_depth, int n_trees,
                         std::uint64_t seed, const ForestOptions& options) {
    if (train.empty()) throw ValidationError("training set is empty");
    if (max_depth < 1) throw ValidationError("max_depth must be >= 1");
    if (n_trees < 1) throw ValidationError("n_trees must be >= 1");
    if (options.features_per_split < 1 || options.features_per_split > kFeatureCount) {
        throw ValidationError("features_per_split must be in [1, 8]");
    }

    ForestModel model;
    model.n_trees = n_trees;
    model.max_depth = max_depth;
    model.features_per_split = options.features_per_split;
    model.master_seed = seed;
    model.trees.resize(static_cast<std::size_t>(n_trees));

    std::vector<std::uint64_t> tree_seeds(static_cast<std::size_t>(n_trees));
    for (int t = 0; t < n_trees; ++t) {
        tree_seeds[static_cast<std::size_t>(t)] = derive_seed(seed, static_cast<std::uint64_t>(t));
    }

    int n_threads = options.n_threads > 0
                        ? options.n_threads
                        : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    n_threads = std::min(n_threads, n_trees);
    if (n_threads <= 1) {
        for (int t = 0; t < n_trees; ++t) {
            model.trees[static_cast<std::size_t>(t)] = build_tree(
                train, max_depth, options.features_per_split, tree_seeds[static_cast<std::size_t>(t)]);
        }
    } else {
        std::atomic<int> next{0};
        auto worker = [&] {
            for (;;) {
                int t = next.fetch_add(1);
                if (t >= n_trees) return;
                model.trees[static_cast<std::size_t>(t)] =
                    build_tree(train, max_depth, options.features_per_split,
                               tree_seeds[static_cast<std::size_t>(t)]);
            }
        };
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return model;
}

EvalReport evaluate_predictions(std::span<const int> predicted, std::span<const int> actual) {
    if (predicted.size() != actual.size() || actual.empty()) {
        throw ValidationError("prediction/actual size mismatch or empty");
    }
    EvalReport report;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ++report.confusion[static_cast<std::size_t>(class_index(actual[i]))]
                          [static_cast<std::size_t>(class_index(predicted[i]))];
    }
    std::int64_t correct = 0, total = 0;
    for (int c = 0; c < kClasses; ++c) {
        correct += report.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        for (int p = 0; p < kClasses; ++p) {
            total += report.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)];
        }
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(total);

    double support_sum = 0.0;
    int present = 0;
    for (int c = 0; c < kClasses; ++c) {
        auto ci = static_cast<std::size_t>(c);
        std::int64_t tp = report.confusion[ci][ci];
        std::int64_t actual_c = 0, predicted_c = 0;
        for (int o = 0; o < kClasses; ++o) {
            actual_c += report.confusion[ci][static_cast<std::size_t>(o)];
            predicted_c += report.confusion[static_cast<std::size_t>(o)][ci];
        }
        if (actual_c == 0) continue;  // class absent from the test set
        ++present;
        double precision = predicted_c > 0 ? static_cast<double>(tp) / static_cast<double>(predicted_c) : 0.0;
        double recall = static_cast<double>(tp) / static_cast<double>(actual_c);
        double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        double support = static_cast<double>(actual_c);
        report.macro_precision += precision;
        report.macro_recall += recall;
        report.macro_f1 += f1;
        report.weighted_precision += precision * support;
        report.weighted_recall += recall * support;
        report.weighted_f1 += f1 * support;
        support_sum += support;
    }
    if (present > 0) {
        report.macro_precision /= present;
        report.macro_recall /= present;
        report.macro_f1 /= present;
        report.weighted_precision /= support_sum;
        report.weighted_recall /= support_sum;
        report.weighted_f1 /= support_sum;
    }
    return report;
}

EvalReport evaluate(const ForestModel& model, std::span<const LabeledExample> test) {
    std::vector<int> predicted, actual;
    predicted.reserve(test.size());
    actual.reserve(test.size());
    for (const LabeledExample& ex : test) {
        predicted.push_back(model.predict(ex.features));
        actual.push_back(ex.label);
    }
    return evaluate_predictions(predicted, actual);
}

std::vector<SweepRow> depth_sweep(std::span<const LabeledExample> train,
                                  std::span<const LabeledExample> test,
                                  std::span<const int> depths, int n_trees, std::uint64_t seed,
                                  const ForestOptions& options) {
    std::vector<SweepRow> rows;
    rows.reserve(depths.size());
    for (int depth : depths) {
        ForestModel model = train_forest(train, depth, n_trees, seed, options);
        rows.push_back({depth, evaluate(model, test)});
    }
    return rows;
}

void write_depth_sweep_csv(std::span<const SweepRow> rows, const std::filesystem::path& path) {
    CsvWriter csv(path, {"max_depth", "accuracy", "macro_precision", "macro_recall", "macro_f1",
                         "weighted_precision", "weighted_recall", "weighted_f1"});
    for (const SweepRow& row : rows) {
        csv.write_row({CsvWriter::cell(static_cast<std::int64_t>(row.max_depth)),
                       CsvWriter::cell(row.report.accuracy),
                       CsvWriter::cell(row.report.macro_precision),
                       CsvWriter::cell(row.report.macro_recall),
                       CsvWriter::cell(row.report.macro_f1),
                       CsvWriter::cell(row.report.weighted_precision),
                       CsvWriter::cell(row.report.weighted_recall),
                       CsvWriter::cell(row.report.weighted_f1)});
    }
}

void write_class_sizes_csv(std::span<const LabeledExample> examples,
                           const std::filesystem::path& path) {
    std::array<std::int64_t, kClasses> counts{};
    for (const LabeledExample& ex : examples) {
        ++counts[static_cast<std::size_t>(class_index(ex.label))];
    }
    CsvWriter csv(path, {"class", "n_users"});
    csv.write_row({"good", CsvWriter::cell(counts[2])});
    csv.write_row({"average", CsvWriter::cell(counts[1])});
    csv.write_row({"bad", CsvWriter::cell(counts[0])});
    csv.write_row({"total", CsvWriter::cell(counts[0] + counts[1] + counts[2])});
}

std::string model_to_json(const ForestModel& model) {
    nlohmann::json j;
    j["version"] = 1;
    j["n_trees"] = model.n_trees;
    j["max_depth"] = model.max_depth;
    j["features_per_split"] = model.features_per_split;
    j["master_seed"] = model.master_seed;
    j["feature_names"] = kFeatureNames;
    j["trees"] = nlohmann::json::array();
    for (const DecisionTree& tree : model.trees) {
        nlohmann::json t;
        auto& feature = t["feature"] = nlohmann::json::array();
        auto& threshold = t["threshold"] = nlohmann::json::array();
        auto& left = t["left"] = nlohmann::json::array();
        auto& right = t["right"] = nlohmann::json::array();
        auto& label = t["label"] = nlohmann::json::array();
        for (const auto& node : tree.nodes) {
            feature.push_back(node.feature);
            threshold.push_back(node.threshold);
            left.push_back(node.left);
            right.push_back(node.right);
            label.push_back(node.label);
        }
        j["trees"].push_back(std::move(t));
    }
    return j.dump();
}

ForestModel model_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("version", 0) != 1) {
        throw ValidationError("unrecognized model format");
    }
    ForestModel model;
    model.n_trees = j.at("n_trees").get<int>();
    model.max_depth = j.at("max_depth").get<int>();
    model.features_per_split = j.at("features_per_split").get<int>();
    model.master_seed = j.at("master_seed").get<std::uint64_t>();
    for (const auto& t : j.at("trees")) {
        DecisionTree tree;
        const auto& feature = t.at("feature");
        const auto& threshold = t.at("threshold");
        const auto& left = t.at("left");
        const auto& right = t.at("right");
        const auto& label = t.at("label");
        const std::size_t n = feature.size();
        if (threshold.size() != n || left.size() != n || right.size() != n || label.size() != n) {
            throw ValidationError("model tree arrays have mismatched lengths");
        }
        tree.nodes.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            tree.nodes[i].feature = feature[i].get<int>();
            tree.nodes[i].threshold = threshold[i].get<double>();
            tree.nodes[i].left = left[i].get<std::int32_t>();
            tree.nodes[i].right = right[i].get<std::int32_t>();
            tree.nodes[i].label = label[i].get<int>();
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

void save_model(const ForestModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << model_to_json(model) << '\n';
}

ForestModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingInputError("cannot open model file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_json(text);
}

}  // namespace channelscope::learn
