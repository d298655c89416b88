#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vfdet {

// Full N-point DFT of a real signal:
//   X[k] = sum_n x[n] * exp(-2*pi*i*k*n / N),  0 <= k < N.
// Unnormalized, forward sign convention. Backed by an FFT; agrees with the
// direct sum to ~1e-12 relative. Throws InputError on empty input.
std::vector<std::complex<double>> dft(std::span<const double> x);

// (a.b) / (|a||b|); 0 if either vector is all zero.
// Throws InputError on length mismatch or empty inputs.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Per-coefficient frequency-domain similarity between a signal and the two
// decomposition components it was split into. Each half has one entry per
// DFT coefficient:
//   feature[i] = Re(S[i] * conj(C[i])) / (||S|| * ||C||)
// with ||.|| the complex L2 norm over all N coefficients. The entries of a
// half sum to the time-domain cosine similarity of the corresponding pair
// (Parseval), and are symmetric under i -> N-i for real inputs.
struct FeatureVector {
    std::vector<double> imf_similarity;
    std::vector<double> r_similarity;

    // IMF block first, then R block; the classifier consumes this layout.
    std::vector<double> concatenated() const;
};

FeatureVector frequency_similarity_features(
    std::span<const std::complex<double>> signal_dft,
    std::span<const std::complex<double>> imf_dft,
    std::span<const std::complex<double>> r_dft);

}  // namespace vfdet
