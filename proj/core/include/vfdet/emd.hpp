#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>

#include "vfdet/filters.hpp"

namespace vfdet {

struct EmdConfig {
    // Noise band as a fraction of the signal maximum.
    double alpha = 0.05;
    // Threshold on the noise level crossing ratio that decides whether the
    // second component is merged into the working oscillation.
    double beta = 0.02;
    // The decomposition only ever needs the first two oscillatory
    // components plus the residue.
    int max_imfs = 2;
    // Cauchy-type stop criterion for sifting: sum((h_prev-h)^2)/sum(h_prev^2).
    double sift_sd_threshold = 0.2;
    int max_sift_iterations = 100;
    // Measure the noise band from max|x| instead of max(x). The literal
    // rule uses the signed maximum; the switch exists because zero-mean
    // signals with strong negative skew get a very small band otherwise.
    bool noise_level_from_abs_max = false;
    // Swap the two arms of the component-selection rule (sensitivity
    // analysis only).
    bool invert_nlcr_branch = false;
};

struct ExtremaCounts {
    int n_extrema = 0;
    int n_zero_crossings = 0;
};

// Strict interior maxima + minima (flat peaks count once, at their middle
// sample), and sign changes with zeros resolved by the next nonzero sample.
// Throws InputError for inputs shorter than 3 samples.
ExtremaCounts count_extrema_zero_crossings(std::span<const double> x);

// True when the counts differ by at most one: the oscillatory-component
// counting property.
bool imf_property_holds(std::span<const double> x);

// Natural cubic splines through the local maxima and minima. The two
// extrema nearest each signal edge are mirrored across it before fitting,
// which tames end swings. Returns {upper, lower}, or nullopt when there are
// fewer than two maxima or two minima.
std::optional<std::pair<Signal, Signal>> spline_envelopes(std::span<const double> x);

// Extracts one oscillatory component by iterated envelope-mean subtraction.
// Returns nullopt when the input has too few extrema to sift ("monotone
// residue"); the caller stops decomposing.
std::optional<Signal> sift(std::span<const double> x, const EmdConfig& cfg = {});

struct ImfSet {
    std::vector<Signal> imfs;  // fastest oscillation first
    Signal residue;            // input minus the sum of the imfs
    std::size_t source_length = 0;
};

// Repeated sift-and-subtract, up to cfg.max_imfs components. The residue
// completes the identity input = sum(imfs) + residue exactly as computed.
ImfSet decompose(std::span<const double> x, const EmdConfig& cfg = {});

struct SelectedComponents {
    Signal imf;      // first component, or first+second when merged
    Signal residue;  // the decomposition residue
    double nlcr = 0.0;
    double noise_level_v_n = 0.0;
    bool merged_first_two = false;
};

// Component selection by the noise level crossing ratio: the energy of the
// first component relative to the signal over the samples where the first
// component stays inside the +-V_n band. A small ratio means the first
// component carries little besides noise there, and the second component is
// merged in.
SelectedComponents select_components(std::span<const double> x, const ImfSet& imfset,
                                     const EmdConfig& cfg = {});

}  // namespace vfdet
