#include "vfdet/filters.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "vfdet/errors.hpp"

namespace vfdet {

double Biquad::pole_radius() const {
    // z^2 + a1 z + a2 = 0
    const std::complex<double> disc = std::sqrt(std::complex<double>(a1 * a1 - 4.0 * a2, 0.0));
    const double r1 = std::abs((-a1 + disc) / 2.0);
    const double r2 = std::abs((-a1 - disc) / 2.0);
    return std::max(r1, r2);
}

std::vector<Biquad> butterworth_sections(int order, double fc_hz, double fs_hz, bool highpass) {
    if (order < 2 || order % 2 != 0)
        throw InputError("butterworth_sections: order must be even and >= 2, got " +
                         std::to_string(order));
    if (!(fc_hz > 0.0) || !(fc_hz < fs_hz / 2.0))
        throw InputError("butterworth_sections: cutoff must satisfy 0 < fc < fs/2");

    // Analog prototype poles lie on the unit circle; each conjugate pair
    // gives a section s^2 + c*s + 1 with c = 2*sin(theta_k).
    const double k_warp = 2.0 * fs_hz;
    const double omega_c = k_warp * std::tan(std::numbers::pi * fc_hz / fs_hz);

    std::vector<Biquad> sections;
    sections.reserve(static_cast<std::size_t>(order / 2));
    for (int k = 0; k < order / 2; ++k) {
        const double theta = (2.0 * k + 1.0) * std::numbers::pi / (2.0 * order);
        const double c = 2.0 * std::sin(theta);

        // Denominator in s after low-pass scaling: s^2 + c*w*s + w^2.
        // Bilinear transform s = K(1-z^-1)/(1+z^-1) gives, per power of z^-1:
        const double w = omega_c;
        const double a0 = k_warp * k_warp + c * w * k_warp + w * w;
        const double a1 = 2.0 * (w * w - k_warp * k_warp);
        const double a2 = k_warp * k_warp - c * w * k_warp + w * w;

        Biquad s;
        if (highpass) {
            // numerator s^2 -> K^2 (1 - z^-1)^2
            s.b0 = k_warp * k_warp / a0;
            s.b1 = -2.0 * k_warp * k_warp / a0;
            s.b2 = k_warp * k_warp / a0;
        } else {
            // numerator w^2 -> w^2 (1 + z^-1)^2
            s.b0 = w * w / a0;
            s.b1 = 2.0 * w * w / a0;
            s.b2 = w * w / a0;
        }
        s.a1 = a1 / a0;
        s.a2 = a2 / a0;

        if (s.pole_radius() >= 1.0)
            throw InternalError("butterworth_sections: unstable section (pole radius " +
                                std::to_string(s.pole_radius()) + ")");
        sections.push_back(s);
    }
    return sections;
}

Signal apply_cascade(std::span<const Biquad> sections, std::span<const double> x) {
    Signal y(x.begin(), x.end());
    for (const Biquad& s : sections) {
        double z1 = 0.0, z2 = 0.0;
        for (double& v : y) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
    return y;
}

Signal remove_mean(std::span<const double> x) {
    if (x.empty()) throw InputError("remove_mean: empty input");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    Signal y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - mean;
    return y;
}

Signal moving_average(std::span<const double> x, int order) {
    if (order < 1) throw InputError("moving_average: order must be >= 1");
    Signal y(x.size());
    double acc = 0.0;
    const std::size_t m = static_cast<std::size_t>(order);
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += x[i];
        if (i >= m) acc -= x[i - m];
        y[i] = acc / static_cast<double>(order);
    }
    return y;
}

Signal highpass_drift(std::span<const double> x, double fc_hz, double fs_hz, int order) {
    return apply_cascade(butterworth_sections(order, fc_hz, fs_hz, /*highpass=*/true), x);
}

Signal butterworth_lowpass(std::span<const double> x, double fc_hz, double fs_hz, int order) {
    return apply_cascade(butterworth_sections(order, fc_hz, fs_hz, /*highpass=*/false), x);
}

Signal preprocess_pipeline(std::span<const double> x, double fs_hz, const FilterChainConfig& cfg) {
    Signal y = remove_mean(x);
    y = moving_average(y, cfg.ma_order);
    y = highpass_drift(y, cfg.hp_cutoff_hz, fs_hz, cfg.hp_order);
    y = butterworth_lowpass(y, cfg.lp_cutoff_hz, fs_hz, cfg.lp_order);
    return y;
}

}  // namespace vfdet
