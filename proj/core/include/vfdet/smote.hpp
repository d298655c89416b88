#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vfdet/dataset.hpp"

namespace vfdet {

struct SmoteConfig {
    std::size_t k_neighbors = 5;
    double target_ratio = 1.0;  // minority:majority after synthesis
    std::uint64_t seed = 1;
};

// Synthesize minority-class samples by interpolating toward nearest
// neighbours until the class reaches round(target_ratio * majority_count).
// Bases are cycled round-robin; each synthetic sample draws from its own
// seeded stream, so the output is independent of evaluation order.
Dataset smote_oversample(const Dataset& minority, std::size_t majority_count,
                         const SmoteConfig& cfg);

// Convenience wrapper: returns `data` plus synthetic minority rows appended.
Dataset smote_balance(const Dataset& data, int minority_label, const SmoteConfig& cfg);

}  // namespace vfdet
