#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vfdet {

using Signal = std::vector<double>;

// Four-stage conditioning chain applied to every episode before
// decomposition: mean removal, order-5 moving average, 1 Hz drift
// suppression, 20 Hz Butterworth low-pass.
struct FilterChainConfig {
    int ma_order = 5;
    double hp_cutoff_hz = 1.0;
    int hp_order = 2;
    double lp_cutoff_hz = 20.0;
    int lp_order = 12;
};

// One second-order IIR section, a0 normalized to 1.
struct Biquad {
    double b0 = 0, b1 = 0, b2 = 0;
    double a1 = 0, a2 = 0;

    // Larger pole magnitude of the section; must be < 1 for stability.
    double pole_radius() const;
};

// Butterworth design via bilinear transform with frequency pre-warping.
// `order` must be even and >= 2; returns order/2 cascaded sections.
// Throws InputError on bad parameters, InternalError if any section
// comes out unstable (cannot happen for 0 < fc < fs/2).
std::vector<Biquad> butterworth_sections(int order, double fc_hz, double fs_hz, bool highpass);

// Causal direct-form-II-transposed cascade with zero initial state.
Signal apply_cascade(std::span<const Biquad> sections, std::span<const double> x);

// x - mean(x). Throws InputError on empty input.
Signal remove_mean(std::span<const double> x);

// Causal FIR with `order` taps of 1/order, zero initial state: the first
// order-1 outputs are partial sums scaled by 1/order.
Signal moving_average(std::span<const double> x, int order);

// 2nd-order (configurable) Butterworth high-pass, causal single pass.
Signal highpass_drift(std::span<const double> x, double fc_hz, double fs_hz, int order = 2);

// Even-order Butterworth low-pass as a biquad cascade, causal single pass.
Signal butterworth_lowpass(std::span<const double> x, double fc_hz, double fs_hz, int order);

// The four stages in order. Output length equals input length.
Signal preprocess_pipeline(std::span<const double> x, double fs_hz,
                           const FilterChainConfig& cfg = {});

}  // namespace vfdet
