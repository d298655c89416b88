#include "vfdet/synth.hpp"

#include <cmath>
#include <numbers>

#include "vfdet/errors.hpp"
#include "vfdet/rng.hpp"

namespace vfdet {

namespace {

std::size_t episode_samples(const SynthConfig& cfg) {
    if (!(cfg.sampling_rate_hz > 0) || !(cfg.episode_length_s > 0))
        throw InputError("synth: sampling rate and episode length must be positive");
    return static_cast<std::size_t>(std::llround(cfg.episode_length_s * cfg.sampling_rate_hz));
}

void add_common(EcgEpisode& ep, const SynthConfig& cfg, Rng& rng) {
    const double fs = cfg.sampling_rate_hz;
    const double drift_hz = 0.2 + 0.2 * rng.uniform();
    const double drift_phase = 2.0 * std::numbers::pi * rng.uniform();
    for (std::size_t i = 0; i < ep.samples.size(); ++i) {
        const double t = static_cast<double>(i) / fs;
        ep.samples[i] += cfg.drift_amplitude *
                         std::sin(2.0 * std::numbers::pi * drift_hz * t + drift_phase);
        ep.samples[i] += cfg.noise_sigma * rng.normal();
    }
    ep.sampling_rate_hz = fs;
    ep.episode_length_s = cfg.episode_length_s;
}

}  // namespace

EcgEpisode synth_vf_episode(const SynthConfig& cfg, std::uint64_t seed) {
    const std::size_t n = episode_samples(cfg);
    Rng rng(seed);

    // Dominant and secondary tones on exact transform bins inside 4-6.4 Hz.
    const double bin_hz = cfg.sampling_rate_hz / static_cast<double>(n);
    const auto k_lo = static_cast<std::size_t>(std::ceil(4.0 / bin_hz));
    const auto k_hi = static_cast<std::size_t>(std::floor(6.4 / bin_hz));
    const std::size_t k_main = k_lo + rng.below(k_hi - k_lo + 1);
    const std::size_t k_second = k_lo + rng.below(k_hi - k_lo + 1);

    const double f_main = static_cast<double>(k_main) * bin_hz;
    const double f_second = static_cast<double>(k_second) * bin_hz;
    const double phase_main = 2.0 * std::numbers::pi * rng.uniform();
    const double phase_second = 2.0 * std::numbers::pi * rng.uniform();
    const double amp_second = 0.3 + 0.05 * rng.normal();

    EcgEpisode ep;
    ep.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / cfg.sampling_rate_hz;
        ep.samples[i] = std::sin(2.0 * std::numbers::pi * f_main * t + phase_main) +
                        amp_second * std::sin(2.0 * std::numbers::pi * f_second * t + phase_second);
    }
    add_common(ep, cfg, rng);
    ep.label = Rhythm::Vf;
    ep.source_record = "synth-vf";
    return ep;
}

EcgEpisode synth_qrs_episode(const SynthConfig& cfg, std::uint64_t seed) {
    const std::size_t n = episode_samples(cfg);
    Rng rng(seed);

    // Beat period in whole samples (60-100 bpm at 250 Hz).
    static constexpr std::size_t kPeriods[] = {150, 175, 200, 225, 250};
    const std::size_t period = kPeriods[rng.below(std::size(kPeriods))];
    const std::size_t offset = rng.below(period);

    const double fs = cfg.sampling_rate_hz;
    const double qrs_sigma = 0.02 * fs;   // samples
    const double t_sigma = 0.05 * fs;
    const double t_delay = 0.20 * fs;
    const double t_amp = 0.25 + 0.02 * rng.normal();

    EcgEpisode ep;
    ep.samples.assign(n, 0.0);
    for (std::size_t beat = offset; beat < n + period; beat += period) {
        const auto center = static_cast<double>(beat);
        const auto lo = beat > 2 * period ? beat - 2 * period : std::size_t{0};
        for (std::size_t i = lo; i < std::min(n, beat + 2 * period); ++i) {
            const double d = static_cast<double>(i) - center;
            // Biphasic spike: derivative-of-Gaussian QRS, then a T bump.
            ep.samples[i] += -(d / qrs_sigma) * std::exp(-0.5 * d * d / (qrs_sigma * qrs_sigma));
            const double dt = d - t_delay;
            ep.samples[i] += t_amp * std::exp(-0.5 * dt * dt / (t_sigma * t_sigma));
        }
    }
    add_common(ep, cfg, rng);
    ep.label = Rhythm::NotVf;
    ep.source_record = "synth-qrs";
    return ep;
}

std::vector<EcgEpisode> synth_corpus(std::size_t n_vf, std::size_t n_not_vf,
                                     const SynthConfig& cfg, std::uint64_t seed) {
    std::vector<EcgEpisode> episodes;
    episodes.reserve(n_vf + n_not_vf);
    for (std::size_t i = 0; i < n_vf; ++i) {
        episodes.push_back(synth_vf_episode(cfg, mix_seed(seed, i)));
        episodes.back().start_index = i;
    }
    for (std::size_t i = 0; i < n_not_vf; ++i) {
        episodes.push_back(synth_qrs_episode(cfg, mix_seed(seed, n_vf + i)));
        episodes.back().start_index = n_vf + i;
    }
    return episodes;
}

}  // namespace vfdet
