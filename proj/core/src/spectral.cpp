#include "vfdet/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "vfdet/errors.hpp"

namespace vfdet {

namespace {

// One cached plan per transform length. Plans are created with
// FFTW_UNALIGNED so fftw_execute_dft can run on ordinary caller buffers;
// plan creation is serialized (FFTW planning is not thread safe), execution
// is concurrent.
class PlanCache {
public:
    fftw_plan get(std::size_t n) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second->plan;
        auto entry = std::make_unique<Entry>(n);
        fftw_plan plan = entry->plan;
        plans_.emplace(n, std::move(entry));
        return plan;
    }

    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

private:
    struct Entry {
        explicit Entry(std::size_t n) : scratch(2 * n) {
            plan = fftw_plan_dft_1d(static_cast<int>(n),
                                    reinterpret_cast<fftw_complex*>(scratch.data()),
                                    reinterpret_cast<fftw_complex*>(scratch.data() + n),
                                    FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        }
        ~Entry() { fftw_destroy_plan(plan); }
        Entry(const Entry&) = delete;
        Entry& operator=(const Entry&) = delete;

        std::vector<std::complex<double>> scratch;
        fftw_plan plan;
    };

    std::mutex mutex_;
    std::map<std::size_t, std::unique_ptr<Entry>> plans_;
};

double l2_norm(std::span<const std::complex<double>> v) {
    double s = 0.0;
    for (const auto& c : v) s += std::norm(c);
    return std::sqrt(s);
}

}  // namespace

std::vector<std::complex<double>> dft(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) throw InputError("dft: empty input");

    std::vector<std::complex<double>> in(n);
    for (std::size_t i = 0; i < n; ++i) in[i] = x[i];
    std::vector<std::complex<double>> out(n);

    fftw_plan plan = PlanCache::instance().get(n);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw InputError("cosine_similarity: length mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
    if (a.empty()) throw InputError("cosine_similarity: empty input");

    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<double> FeatureVector::concatenated() const {
    std::vector<double> out;
    out.reserve(imf_similarity.size() + r_similarity.size());
    out.insert(out.end(), imf_similarity.begin(), imf_similarity.end());
    out.insert(out.end(), r_similarity.begin(), r_similarity.end());
    return out;
}

FeatureVector frequency_similarity_features(std::span<const std::complex<double>> signal_dft,
                                            std::span<const std::complex<double>> imf_dft,
                                            std::span<const std::complex<double>> r_dft) {
    const std::size_t n = signal_dft.size();
    if (imf_dft.size() != n || r_dft.size() != n)
        throw InputError("frequency_similarity_features: coefficient length mismatch");
    if (n == 0) throw InputError("frequency_similarity_features: empty input");

    const double signal_norm = l2_norm(signal_dft);

    FeatureVector fv;
    auto fill_half = [&](std::span<const std::complex<double>> comp, std::vector<double>& out) {
        out.assign(n, 0.0);
        const double denom = signal_norm * l2_norm(comp);
        if (denom == 0.0) return;  // zero component -> all-zero half
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = (signal_dft[i].real() * comp[i].real() +
                      signal_dft[i].imag() * comp[i].imag()) /
                     denom;
        }
    };
    fill_half(imf_dft, fv.imf_similarity);
    fill_half(r_dft, fv.r_similarity);
    return fv;
}

}  // namespace vfdet
