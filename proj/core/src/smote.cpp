#include "vfdet/smote.hpp"

#include <algorithm>
#include <cmath>

#include "vfdet/errors.hpp"
#include "vfdet/rng.hpp"

namespace vfdet {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

}  // namespace

Dataset smote_oversample(const Dataset& minority, std::size_t majority_count,
                         const SmoteConfig& cfg) {
    if (cfg.k_neighbors < 1) throw InputError("smote: k_neighbors must be >= 1");
    if (!(cfg.target_ratio > 0.0) || cfg.target_ratio > 1.0)
        throw InputError("smote: target_ratio must be in (0, 1]");
    const std::size_t n = minority.n_rows;
    if (n <= cfg.k_neighbors)
        throw InputError("smote: need at least " + std::to_string(cfg.k_neighbors + 1) +
                         " minority samples for k=" + std::to_string(cfg.k_neighbors) +
                         ", got " + std::to_string(n));

    const auto target = static_cast<std::size_t>(
        std::llround(cfg.target_ratio * static_cast<double>(majority_count)));
    const std::size_t n_synthetic = target > n ? target - n : 0;

    Dataset out;
    out.n_cols = minority.n_cols;
    if (n_synthetic == 0) return out;

    // k nearest minority neighbours of every base point, ties to lower index.
    const std::size_t k = cfg.k_neighbors;
    std::vector<std::uint32_t> neighbours(n * k);
    std::vector<std::pair<double, std::uint32_t>> dist;
    for (std::size_t i = 0; i < n; ++i) {
        dist.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            dist.emplace_back(squared_distance(minority.row(i), minority.row(j)),
                              static_cast<std::uint32_t>(j));
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                          dist.end());
        for (std::size_t t = 0; t < k; ++t) neighbours[i * k + t] = dist[t].second;
    }

    out.values.resize(n_synthetic * out.n_cols);
    out.labels.resize(n_synthetic);
    out.sources.assign(n_synthetic, "smote");
    for (std::size_t s = 0; s < n_synthetic; ++s) {
        const std::size_t base = s % n;
        Rng rng(mix_seed(cfg.seed, s));
        const auto nb = neighbours[base * k + rng.below(k)];
        const double u = rng.uniform();
        const auto x = minority.row(base);
        const auto xn = minority.row(nb);
        auto row = out.row(s);
        for (std::size_t c = 0; c < out.n_cols; ++c) row[c] = x[c] + u * (xn[c] - x[c]);
        out.labels[s] = base < minority.labels.size() ? minority.labels[base] : +1;
    }
    out.n_rows = n_synthetic;
    return out;
}

Dataset smote_balance(const Dataset& data, int minority_label, const SmoteConfig& cfg) {
    std::vector<std::size_t> minority_rows;
    for (std::size_t i = 0; i < data.n_rows; ++i)
        if (data.labels[i] == minority_label) minority_rows.push_back(i);
    const std::size_t majority_count = data.n_rows - minority_rows.size();
    if (minority_rows.size() >= majority_count) return data;

    const Dataset synthetic =
        smote_oversample(data.subset(minority_rows), majority_count, cfg);
    Dataset out = data;
    for (std::size_t i = 0; i < synthetic.n_rows; ++i)
        out.append_row(synthetic.row(i), synthetic.labels[i], synthetic.sources[i]);
    return out;
}

}  // namespace vfdet
