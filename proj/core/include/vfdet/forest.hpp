#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vfdet/dataset.hpp"

namespace vfdet {

struct ForestConfig {
    std::size_t n_trees = 750;
    std::size_t max_features_per_split = 0;  // 0 picks round(sqrt(dim))
    std::size_t min_samples_leaf = 1;
    std::size_t max_depth = 0;  // 0 = unlimited
    std::uint64_t seed = 1;
    unsigned jobs = 0;
};

// Axis-aligned threshold tree stored as a flat node array.
// Leaves have feature == -1 and carry the majority label.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t label = 0;

    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    std::vector<double> raw_importance;   // per-feature weighted Gini decrease
    std::vector<std::uint8_t> in_bag;     // per training row

    int predict(std::span<const double> x) const;
    bool operator==(const DecisionTree&) const = default;
};

struct RandomForestModel {
    std::vector<DecisionTree> trees;
    std::size_t n_features = 0;
    double oob_accuracy = 0.0;

    // Majority vote across trees; a tie votes for the positive class.
    int predict(std::span<const double> x) const;
};

struct FeatureMask {
    std::vector<std::size_t> selected_indices;  // ascending
    double fraction = 1.0;
    std::size_t full_dim = 0;  // 0 = identity mask (keep every feature)

    bool is_identity() const { return full_dim == 0; }
    std::vector<double> apply(std::span<const double> row) const;
    Dataset apply(const Dataset& d) const;
};

RandomForestModel train_forest(const Dataset& data, const ForestConfig& cfg);

// Mean per-tree Gini importance, normalized to sum to 1.
std::vector<double> feature_importances(const RandomForestModel& model);

// Indices of the round(fraction * dim) largest importances; ties go to the
// lower index.
FeatureMask select_top_fraction(std::span<const double> importances, double fraction);

}  // namespace vfdet
