#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "vfdet/spectral.hpp"
#include "vfdet/synth.hpp"

using namespace vfdet;

namespace {

// Index of the largest-magnitude coefficient over the positive-frequency
// half, ignoring the sub-1 Hz drift bins.
std::size_t dominant_bin(const std::vector<double>& x, double fs) {
    const auto spec = dft(x);
    const std::size_t n = spec.size();
    const double bin_hz = fs / static_cast<double>(n);
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t k = static_cast<std::size_t>(1.0 / bin_hz); k <= n / 2; ++k) {
        if (std::abs(spec[k]) > best_mag) {
            best_mag = std::abs(spec[k]);
            best = k;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("fibrillation-like episodes live in the 4-6.4 Hz band") {
    const SynthConfig cfg;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto ep = synth_vf_episode(cfg, seed);
        CHECK(ep.samples.size() == 1250);
        CHECK(ep.label == Rhythm::Vf);
        CHECK(ep.sampling_rate_hz == 250.0);
        CHECK(ep.source_record == "synth-vf");

        const double hz =
            static_cast<double>(dominant_bin(ep.samples, 250.0)) * 250.0 / 1250.0;
        CHECK(hz >= 4.0);
        CHECK(hz <= 6.4);
    }
}

TEST_CASE("beat-like episodes have sharp peaks and a slow beat period") {
    const SynthConfig cfg;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto ep = synth_qrs_episode(cfg, seed);
        CHECK(ep.samples.size() == 1250);
        CHECK(ep.label == Rhythm::NotVf);
        CHECK(ep.source_record == "synth-qrs");

        // strongest autocorrelation lag = one beat, 150-250 samples (60-100
        // bpm); the spectral peak itself lands on a pulse-shape harmonic
        double r0 = 0.0;
        for (double v : ep.samples) r0 += v * v;
        double best = 0.0;
        std::size_t best_lag = 0;
        for (std::size_t lag = 100; lag <= 300; ++lag) {
            double r = 0.0;
            for (std::size_t i = lag; i < ep.samples.size(); ++i)
                r += ep.samples[i] * ep.samples[i - lag];
            if (r > best) {
                best = r;
                best_lag = lag;
            }
        }
        CHECK(best_lag >= 150);
        CHECK(best_lag <= 250);
        CHECK(best > 0.5 * r0);

        // impulse train: kurtosis well above a sinusoid's 1.5
        double mean = 0.0;
        for (double v : ep.samples) mean += v;
        mean /= static_cast<double>(ep.samples.size());
        double m2 = 0.0, m4 = 0.0;
        for (double v : ep.samples) {
            const double d = v - mean;
            m2 += d * d;
            m4 += d * d * d * d;
        }
        m2 /= static_cast<double>(ep.samples.size());
        m4 /= static_cast<double>(ep.samples.size());
        CHECK(m4 / (m2 * m2) > 4.0);
    }
}

TEST_CASE("episodes are seed-deterministic and seed-sensitive") {
    const SynthConfig cfg;
    CHECK(synth_vf_episode(cfg, 5).samples == synth_vf_episode(cfg, 5).samples);
    CHECK(synth_vf_episode(cfg, 5).samples != synth_vf_episode(cfg, 6).samples);
    CHECK(synth_qrs_episode(cfg, 5).samples == synth_qrs_episode(cfg, 5).samples);
}

TEST_CASE("corpus layout: fibrillation first, positions as start indices") {
    SynthConfig cfg;
    cfg.episode_length_s = 2.0;
    const auto corpus = synth_corpus(3, 4, cfg, 99);
    REQUIRE(corpus.size() == 7);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        CHECK(corpus[i].label == (i < 3 ? Rhythm::Vf : Rhythm::NotVf));
        CHECK(corpus[i].start_index == i);
        CHECK(corpus[i].samples.size() == 500);
    }

    // same seed, same corpus; the two halves use distinct per-episode streams
    const auto again = synth_corpus(3, 4, cfg, 99);
    for (std::size_t i = 0; i < corpus.size(); ++i)
        CHECK(corpus[i].samples == again[i].samples);
}

TEST_CASE("a custom rate and length shape the episode") {
    SynthConfig cfg;
    cfg.sampling_rate_hz = 360.0;
    cfg.episode_length_s = 4.0;
    const auto ep = synth_vf_episode(cfg, 3);
    CHECK(ep.samples.size() == 1440);
    CHECK(ep.sampling_rate_hz == 360.0);
    CHECK(ep.episode_length_s == 4.0);
}
