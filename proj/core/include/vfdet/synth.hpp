#pragma once

#include <cstdint>
#include <vector>

#include "vfdet/episode.hpp"

namespace vfdet {

// Synthetic test signals. Fibrillation-like episodes are coarse sinusoidal
// mixtures in the 4-6.4 Hz band; the alternative class is a QRS-like impulse
// train with a T-wave bump. Tone frequencies sit exactly on transform bins
// and beat periods are whole sample counts, so episodes of the same kind
// produce tightly clustered feature vectors.
struct SynthConfig {
    double sampling_rate_hz = 250.0;
    double episode_length_s = 5.0;
    double noise_sigma = 0.02;       // additive white noise, mV
    double drift_amplitude = 0.05;   // sub-1 Hz baseline wander, mV
};

EcgEpisode synth_vf_episode(const SynthConfig& cfg, std::uint64_t seed);
EcgEpisode synth_qrs_episode(const SynthConfig& cfg, std::uint64_t seed);

// n_vf + n_not_vf episodes, per-episode seeds derived from `seed`.
std::vector<EcgEpisode> synth_corpus(std::size_t n_vf, std::size_t n_not_vf,
                                     const SynthConfig& cfg, std::uint64_t seed);

}  // namespace vfdet
