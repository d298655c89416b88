#include "vfdet/feature_pipeline.hpp"

#include <string>

#include "vfdet/emd.hpp"
#include "vfdet/errors.hpp"
#include "vfdet/filters.hpp"
#include "vfdet/parallel.hpp"

namespace vfdet {

std::optional<FeatureVector> compute_features(const EcgEpisode& episode,
                                              const PipelineConfig& cfg) {
    if (episode.samples.empty()) return std::nullopt;
    try {
        const Signal clean =
            preprocess_pipeline(episode.samples, episode.sampling_rate_hz, cfg.filter_chain());
        const EmdConfig emd_cfg = cfg.emd();
        const ImfSet set = decompose(clean, emd_cfg);
        const SelectedComponents sel = select_components(clean, set, emd_cfg);

        const auto signal_dft = dft(clean);
        const auto imf_dft = dft(sel.imf);
        const auto r_dft = dft(sel.residue);
        return frequency_similarity_features(signal_dft, imf_dft, r_dft);
    } catch (const Error&) {
        return std::nullopt;
    }
}

FeatureExtractionResult build_dataset(std::span<const EcgEpisode> episodes,
                                      const PipelineConfig& cfg, unsigned jobs) {
    std::vector<std::optional<FeatureVector>> rows(episodes.size());
    parallel_for(episodes.size(), jobs,
                 [&](std::size_t i) { rows[i] = compute_features(episodes[i], cfg); });

    FeatureExtractionResult result;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        if (!rows[i]) {
            ++result.skipped;
            continue;
        }
        const auto concatenated = rows[i]->concatenated();
        result.dataset.append_row(concatenated,
                                  episodes[i].label == Rhythm::Vf ? +1 : -1,
                                  episodes[i].source_record + ":" +
                                      std::to_string(episodes[i].start_index));
    }
    return result;
}

}  // namespace vfdet
