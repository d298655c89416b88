#include "vfdet/dataset.hpp"

#include <algorithm>

#include "vfdet/errors.hpp"

namespace vfdet {

void Dataset::append_row(std::span<const double> r, int label, std::string source) {
    if (n_rows == 0 && n_cols == 0) n_cols = r.size();
    if (r.size() != n_cols)
        throw InputError("dataset: row has " + std::to_string(r.size()) +
                         " features, expected " + std::to_string(n_cols));
    values.insert(values.end(), r.begin(), r.end());
    labels.push_back(label);
    sources.push_back(std::move(source));
    ++n_rows;
}

std::size_t Dataset::count_label(int label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.n_cols = n_cols;
    out.values.reserve(indices.size() * n_cols);
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= n_rows) throw InputError("dataset: subset index out of range");
        out.values.insert(out.values.end(), values.begin() + static_cast<std::ptrdiff_t>(i * n_cols),
                          values.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_cols));
        out.labels.push_back(labels[i]);
        out.sources.push_back(i < sources.size() ? sources[i] : std::string{});
        ++out.n_rows;
    }
    return out;
}

}  // namespace vfdet
