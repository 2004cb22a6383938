#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "channelscope/errors.hpp"
#include "channelscope/sessions.hpp"

namespace channelscope::learn {

using sessions::ChannelWeekStats;

inline constexpr int kFeatureCount = 8;
using FeatureVector = std::array<double, kFeatureCount>;

// Fixed component order; the stream-count components (3..5) sum to component 2.
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "initial_followers", "bucket_index",      "streams_per_week",   "n_streams_lt5h",
    "n_streams_5to10h",  "n_streams_gt10h",   "has_non_gaming",     "played_popular_game",
};

struct LabeledExample {
    FeatureVector features{};
    int label = 0;  // 1 = good, 0 = average, -1 = bad
};

struct StratificationError : ValidationError {
    using ValidationError::ValidationError;
};
struct OversampleError : ValidationError {
    using ValidationError::ValidationError;
};

// Throws ValidationError for channels outside the [0, 20000) bucket range.
FeatureVector extract_features(const ChannelWeekStats& stats);

struct SplitResult {
    std::vector<LabeledExample> train;
    std::vector<LabeledExample> test;
};

// Stratified by class: per class, round(train_fraction * n) examples go to
// train. Every class needs at least 2 members. Deterministic under seed.
SplitResult split_train_test(std::span<const LabeledExample> examples,
                             double train_fraction = 0.8, std::uint64_t seed = 1);

// Oversamples every minority class up to the majority count. Each synthetic
// point is x + u * (nn - x) for a random minority example x, one of its k
// nearest same-class neighbors nn (Euclidean), and uniform u in [0, 1].
// Originals are preserved; k is clamped to class size - 1.
std::vector<LabeledExample> smote(std::span<const LabeledExample> train, int k = 5,
                                  std::uint64_t seed = 1);

struct DecisionTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        int label = 0;
    };
    std::vector<Node> nodes;  // nodes[0] is the root

    int predict(const FeatureVector& x) const;
    int depth() const;
};

struct ForestOptions {
    int features_per_split = 3;  // ceil(sqrt(8))
    int n_threads = 0;           // 0 = hardware concurrency
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    int n_trees = 0;
    int max_depth = 0;
    int features_per_split = 0;
    std::uint64_t master_seed = 0;

    // Majority vote; ties go to the lower class code.
    int predict(const FeatureVector& x) const;
};

// Bagged trees: each is grown on a bootstrap resample of the training set
// with `features_per_split` random split candidates per node, best Gini gain,
// ties to the lowest feature index then lowest threshold. Per-tree seeds
// derive from the master seed, so results do not depend on thread count.
ForestModel train_forest(std::span<const LabeledExample> train, int max_depth, int n_trees = 100,
                         std::uint64_t seed = 1, const ForestOptions& options = {});

struct EvalReport {
    double accuracy = 0.0;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
    std::array<std::array<std::int64_t, 3>, 3> confusion{};  // [actual][predicted], class code + 1
};

EvalReport evaluate(const ForestModel& model, std::span<const LabeledExample> test);
// Metric core, usable with any predictor. Classes absent from the actuals do
// not enter the macro/weighted averages; empty predicted classes score 0
// precision.
EvalReport evaluate_predictions(std::span<const int> predicted, std::span<const int> actual);

struct SweepRow {
    int max_depth = 0;
    EvalReport report;
};

std::vector<SweepRow> depth_sweep(std::span<const LabeledExample> train,
                                  std::span<const LabeledExample> test,
                                  std::span<const int> depths, int n_trees = 100,
                                  std::uint64_t seed = 1, const ForestOptions& options = {});

inline const std::vector<int>& default_sweep_depths() {
    static const std::vector<int> depths = {2, 4, 6, 8, 10, 12, 14, 16};
    return depths;
}

void write_depth_sweep_csv(std::span<const SweepRow> rows, const std::filesystem::path& path);
void write_class_sizes_csv(std::span<const LabeledExample> examples,
                           const std::filesystem::path& path);

// Versioned JSON: trees as integer-indexed node arrays.
std::string model_to_json(const ForestModel& model);
ForestModel model_from_json(const std::string& text);
void save_model(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_model(const std::filesystem::path& path);

}  // namespace channelscope::learn
