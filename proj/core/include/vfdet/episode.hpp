#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vfdet/wfdb.hpp"

namespace vfdet {

// One fixed-length labeled window of samples: the pipeline's unit of work.
struct EcgEpisode {
    std::vector<double> samples;  // millivolts
    double sampling_rate_hz = 250.0;
    double episode_length_s = 0.0;
    Rhythm label = Rhythm::NotVf;  // never Noise
    std::string source_record;
    std::size_t start_index = 0;
};

struct EpisodeWindowing {
    double episode_length_s = 5.0;
    double hop_s = 1.0;
    std::size_t channel = 0;
    // A window is labeled Vf when strictly more than this fraction of its
    // samples lies in fibrillation-annotated regions.
    double vf_overlap_threshold = 0.5;
};

// Slides a window of round(T_e*fs) samples by round(hop*fs), keeping only
// windows fully inside the record. Windows overlapping a noise region by
// any amount are dropped. A record shorter than the window yields an empty
// list; an invalid channel index raises InputError.
std::vector<EcgEpisode> extract_episodes(const EcgRecord& record, const EpisodeWindowing& w = {});

// Plain-text episode: one sample per line in <path>, plus a sidecar
// key=value file (path with extension replaced by ".meta") holding
// sampling_rate_hz, episode_length_s, label, and optionally source.
EcgEpisode read_csv_episode(const std::filesystem::path& path);
void write_csv_episode(const EcgEpisode& episode, const std::filesystem::path& path);

std::filesystem::path csv_sidecar_path(const std::filesystem::path& csv_path);

}  // namespace vfdet
