#pragma once

#include <optional>
#include <span>
#include <vector>

#include "vfdet/config.hpp"
#include "vfdet/dataset.hpp"
#include "vfdet/episode.hpp"
#include "vfdet/spectral.hpp"

namespace vfdet {

// Filter chain, decomposition, component selection, then the frequency-domain
// similarity vector (length 2N). Returns nullopt when the episode cannot be
// featurized; callers skip and log.
std::optional<FeatureVector> compute_features(const EcgEpisode& episode,
                                              const PipelineConfig& cfg);

struct FeatureExtractionResult {
    Dataset dataset;
    std::size_t skipped = 0;
};

// Parallel over episodes; rows keep the episode order (skips excepted).
FeatureExtractionResult build_dataset(std::span<const EcgEpisode> episodes,
                                      const PipelineConfig& cfg, unsigned jobs);

}  // namespace vfdet
