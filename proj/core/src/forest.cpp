#include "vfdet/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vfdet/errors.hpp"
#include "vfdet/parallel.hpp"
#include "vfdet/rng.hpp"

namespace vfdet {

namespace {

double gini(std::size_t pos, std::size_t neg) {
    const double t = static_cast<double>(pos + neg);
    if (t == 0) return 0.0;
    const double p = static_cast<double>(pos) / t;
    const double q = static_cast<double>(neg) / t;
    return 1.0 - p * p - q * q;
}

struct TreeBuilder {
    const Dataset& data;
    const ForestConfig& cfg;
    std::size_t max_features;
    Rng rng;
    DecisionTree tree;

    std::vector<std::uint32_t> feature_order;
    std::vector<std::pair<double, int>> scratch;  // (value, label) per node

    TreeBuilder(const Dataset& d, const ForestConfig& c, std::uint64_t tree_seed)
        : data(d), cfg(c), rng(tree_seed) {
        max_features = cfg.max_features_per_split
                           ? std::min(cfg.max_features_per_split, data.n_cols)
                           : std::max<std::size_t>(
                                 1, static_cast<std::size_t>(std::llround(
                                        std::sqrt(static_cast<double>(data.n_cols)))));
        feature_order.resize(data.n_cols);
        std::iota(feature_order.begin(), feature_order.end(), 0u);
        tree.raw_importance.assign(data.n_cols, 0.0);
    }

    std::int32_t make_leaf(std::size_t pos, std::size_t neg) {
        TreeNode leaf;
        leaf.label = pos >= neg ? +1 : -1;
        tree.nodes.push_back(leaf);
        return static_cast<std::int32_t>(tree.nodes.size() - 1);
    }

    std::int32_t build(std::vector<std::uint32_t>& idx, std::size_t depth) {
        std::size_t pos = 0;
        for (std::uint32_t i : idx) pos += data.labels[i] == +1;
        const std::size_t neg = idx.size() - pos;

        const bool depth_capped = cfg.max_depth && depth >= cfg.max_depth;
        if (pos == 0 || neg == 0 || idx.size() < 2 * cfg.min_samples_leaf || depth_capped)
            return make_leaf(pos, neg);

        const double parent_gini = gini(pos, neg);
        const double n_node = static_cast<double>(idx.size());

        double best_gain = 0.0;
        std::uint32_t best_feature = 0;
        double best_threshold = 0.0;

        for (std::size_t j = 0; j < max_features; ++j) {
            std::swap(feature_order[j], feature_order[j + rng.below(data.n_cols - j)]);
            const std::uint32_t f = feature_order[j];

            scratch.clear();
            for (std::uint32_t i : idx) scratch.emplace_back(data.row(i)[f], data.labels[i]);
            std::sort(scratch.begin(), scratch.end());
            if (scratch.front().first == scratch.back().first) continue;

            std::size_t left_pos = 0, left_n = 0;
            for (std::size_t t = 0; t + 1 < scratch.size(); ++t) {
                left_pos += scratch[t].second == +1;
                ++left_n;
                if (scratch[t].first == scratch[t + 1].first) continue;
                const std::size_t right_n = scratch.size() - left_n;
                if (left_n < cfg.min_samples_leaf || right_n < cfg.min_samples_leaf) continue;
                const double gain =
                    parent_gini -
                    (static_cast<double>(left_n) / n_node) * gini(left_pos, left_n - left_pos) -
                    (static_cast<double>(right_n) / n_node) *
                        gini(pos - left_pos, right_n - (pos - left_pos));
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = 0.5 * (scratch[t].first + scratch[t + 1].first);
                }
            }
        }

        if (best_gain <= 1e-12) return make_leaf(pos, neg);

        tree.raw_importance[best_feature] +=
            (n_node / static_cast<double>(data.n_rows)) * best_gain;

        std::vector<std::uint32_t> left, right;
        for (std::uint32_t i : idx) {
            (data.row(i)[best_feature] <= best_threshold ? left : right).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        TreeNode node;
        node.feature = static_cast<std::int32_t>(best_feature);
        node.threshold = best_threshold;
        tree.nodes.push_back(node);
        const auto self = static_cast<std::int32_t>(tree.nodes.size() - 1);
        tree.nodes[static_cast<std::size_t>(self)].left = build(left, depth + 1);
        tree.nodes[static_cast<std::size_t>(self)].right = build(right, depth + 1);
        return self;
    }
};

}  // namespace

int DecisionTree::predict(std::span<const double> x) const {
    // The top-level build call pushes its node first, so the root is index 0.
    std::size_t at = 0;
    for (;;) {
        const TreeNode& n = nodes[at];
        if (n.feature < 0) return n.label;
        at = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold
                                          ? n.left
                                          : n.right);
    }
}

int RandomForestModel::predict(std::span<const double> x) const {
    long votes = 0;
    for (const auto& t : trees) votes += t.predict(x);
    return votes >= 0 ? +1 : -1;
}

RandomForestModel train_forest(const Dataset& data, const ForestConfig& cfg) {
    if (data.n_rows == 0 || data.n_cols == 0) throw InputError("train_forest: empty dataset");
    std::size_t pos = 0;
    for (int y : data.labels) {
        if (y != +1 && y != -1) throw InputError("train_forest: labels must be +1 or -1");
        pos += y == +1;
    }
    if (pos < 2 || data.n_rows - pos < 2)
        throw InputError("train_forest: need at least 2 samples of each class");
    if (cfg.n_trees == 0) throw InputError("train_forest: n_trees must be >= 1");

    RandomForestModel model;
    model.n_features = data.n_cols;
    model.trees.resize(cfg.n_trees);

    parallel_for(cfg.n_trees, cfg.jobs, [&](std::size_t t) {
        TreeBuilder builder(data, cfg, mix_seed(cfg.seed, t));
        builder.tree.in_bag.assign(data.n_rows, 0);
        std::vector<std::uint32_t> idx(data.n_rows);
        for (auto& i : idx) {
            i = static_cast<std::uint32_t>(builder.rng.below(data.n_rows));
            builder.tree.in_bag[i] = 1;
        }
        builder.build(idx, 0);
        model.trees[t] = std::move(builder.tree);
    });

    // Out-of-bag accuracy: vote only with trees that never saw the row.
    std::size_t voted = 0, correct = 0;
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        long votes = 0;
        bool any = false;
        for (const auto& t : model.trees) {
            if (t.in_bag[i]) continue;
            votes += t.predict(data.row(i));
            any = true;
        }
        if (!any) continue;
        ++voted;
        correct += (votes >= 0 ? +1 : -1) == data.labels[i];
    }
    model.oob_accuracy = voted ? static_cast<double>(correct) / static_cast<double>(voted) : 0.0;
    return model;
}

std::vector<double> feature_importances(const RandomForestModel& model) {
    if (model.trees.empty()) throw InputError("feature_importances: untrained model");
    std::vector<double> mean(model.n_features, 0.0);
    for (const auto& t : model.trees) {
        const double total = std::accumulate(t.raw_importance.begin(), t.raw_importance.end(), 0.0);
        if (total <= 0.0) continue;
        for (std::size_t f = 0; f < model.n_features; ++f)
            mean[f] += t.raw_importance[f] / total;
    }
    const double grand = std::accumulate(mean.begin(), mean.end(), 0.0);
    if (grand <= 0.0)
        throw InputError("feature_importances: no tree found an informative split");
    for (double& v : mean) v /= grand;
    return mean;
}

FeatureMask select_top_fraction(std::span<const double> importances, double fraction) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw InputError("select_top_fraction: fraction must be in (0, 1]");
    if (importances.empty()) throw InputError("select_top_fraction: empty importances");

    const auto k = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(importances.size())));
    std::vector<std::size_t> order(importances.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return importances[a] > importances[b]; });

    FeatureMask mask;
    mask.fraction = fraction;
    mask.full_dim = importances.size();
    mask.selected_indices.assign(order.begin(),
                                 order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(mask.selected_indices.begin(), mask.selected_indices.end());
    return mask;
}

std::vector<double> FeatureMask::apply(std::span<const double> row) const {
    if (is_identity()) return {row.begin(), row.end()};
    if (row.size() != full_dim)
        throw InputError("feature mask built for dimension " + std::to_string(full_dim) +
                         ", row has " + std::to_string(row.size()));
    std::vector<double> out;
    out.reserve(selected_indices.size());
    for (std::size_t i : selected_indices) out.push_back(row[i]);
    return out;
}

Dataset FeatureMask::apply(const Dataset& d) const {
    if (is_identity()) return d;
    Dataset out;
    out.n_cols = selected_indices.size();
    out.values.reserve(d.n_rows * out.n_cols);
    for (std::size_t i = 0; i < d.n_rows; ++i) {
        const auto masked = apply(d.row(i));
        out.values.insert(out.values.end(), masked.begin(), masked.end());
    }
    out.n_rows = d.n_rows;
    out.labels = d.labels;
    out.sources = d.sources;
    return out;
}

}  // namespace vfdet
