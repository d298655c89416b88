#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vfdet {

// Row-major feature matrix with aligned ±1 labels (+1 = fibrillation).
struct Dataset {
    std::vector<double> values;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<int> labels;
    std::vector<std::string> sources;

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * n_cols, n_cols};
    }
    std::span<double> row(std::size_t i) {
        return {values.data() + i * n_cols, n_cols};
    }

    void append_row(std::span<const double> r, int label, std::string source = {});
    std::size_t count_label(int label) const;
    Dataset subset(std::span<const std::size_t> indices) const;
};

}  // namespace vfdet
