#include "vfdet/emd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vfdet/errors.hpp"

namespace vfdet {

namespace {

struct Extrema {
    std::vector<double> pos;  // sample positions, strictly increasing
    std::vector<double> val;
};

// Strict interior extrema; a flat run bounded by lower (higher) samples on
// both sides counts as a single maximum (minimum) at its middle.
Extrema find_extrema(std::span<const double> x, bool maxima) {
    Extrema e;
    const std::size_t n = x.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        const double prev = x[i - 1];
        if (x[i] == x[i + 1]) {
            // flat run [i, j]
            std::size_t j = i;
            while (j + 1 < n && x[j + 1] == x[i]) ++j;
            if (j + 1 < n) {
                const bool is_max = x[i] > prev && x[i] > x[j + 1];
                const bool is_min = x[i] < prev && x[i] < x[j + 1];
                if ((maxima && is_max) || (!maxima && is_min)) {
                    e.pos.push_back(static_cast<double>(i + j) / 2.0);
                    e.val.push_back(x[i]);
                }
            }
            i = j + 1;
            continue;
        }
        const bool is_max = x[i] > prev && x[i] > x[i + 1];
        const bool is_min = x[i] < prev && x[i] < x[i + 1];
        if ((maxima && is_max) || (!maxima && is_min)) {
            e.pos.push_back(static_cast<double>(i));
            e.val.push_back(x[i]);
        }
        ++i;
    }
    return e;
}

// Natural cubic spline through (t, y), evaluated at integers 0..n_out-1.
// Knots must be strictly increasing with at least two entries.
Signal spline_eval(const std::vector<double>& t, const std::vector<double>& y,
                   std::size_t n_out) {
    const std::size_t m = t.size();
    Signal out(n_out);

    if (m == 2) {
        const double slope = (y[1] - y[0]) / (t[1] - t[0]);
        for (std::size_t k = 0; k < n_out; ++k)
            out[k] = y[0] + slope * (static_cast<double>(k) - t[0]);
        return out;
    }

    // Second derivatives M with natural boundary (M front/back = 0);
    // tridiagonal Thomas solve.
    std::vector<double> m2(m, 0.0);
    std::vector<double> diag(m - 2), off(m > 3 ? m - 3 : 0), rhs(m - 2);
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double h0 = t[i] - t[i - 1];
        const double h1 = t[i + 1] - t[i];
        diag[i - 1] = (h0 + h1) / 3.0;
        rhs[i - 1] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        if (i + 2 < m) off[i - 1] = h1 / 6.0;
    }
    for (std::size_t i = 1; i < rhs.size(); ++i) {
        const double q = off[i - 1] / diag[i - 1];
        diag[i] -= q * off[i - 1];
        rhs[i] -= q * rhs[i - 1];
    }
    for (std::size_t i = rhs.size(); i-- > 0;) {
        double v = rhs[i];
        if (i + 1 < rhs.size()) v -= off[i] * m2[i + 2];
        m2[i + 1] = v / diag[i];
    }

    // Piecewise evaluation; eval points and knots are both increasing.
    std::size_t seg = 0;
    for (std::size_t k = 0; k < n_out; ++k) {
        const double xk = static_cast<double>(k);
        while (seg + 2 < m && t[seg + 1] < xk) ++seg;
        const double h = t[seg + 1] - t[seg];
        const double u = (t[seg + 1] - xk) / h;
        const double v = (xk - t[seg]) / h;
        out[k] = u * y[seg] + v * y[seg + 1] +
                 ((u * u * u - u) * m2[seg] + (v * v * v - v) * m2[seg + 1]) * h * h / 6.0;
    }
    return out;
}

// Extends the extrema list by reflecting the two points nearest each edge
// across it, then fits the spline over the whole signal span.
Signal envelope(const Extrema& e, std::size_t n) {
    const double left = 0.0;
    const double right = static_cast<double>(n - 1);
    std::vector<double> t, y;
    t.reserve(e.pos.size() + 4);
    y.reserve(e.pos.size() + 4);

    const std::size_t mirror = std::min<std::size_t>(2, e.pos.size());
    for (std::size_t i = mirror; i-- > 0;) {
        const double p = 2.0 * left - e.pos[i];
        if (p < e.pos.front()) {
            t.push_back(p);
            y.push_back(e.val[i]);
        }
    }
    std::reverse(t.begin(), t.end());
    std::reverse(y.begin(), y.end());

    t.insert(t.end(), e.pos.begin(), e.pos.end());
    y.insert(y.end(), e.val.begin(), e.val.end());

    for (std::size_t i = e.pos.size() - mirror; i < e.pos.size(); ++i) {
        const double p = 2.0 * right - e.pos[i];
        if (p > t.back()) {
            t.push_back(p);
            y.push_back(e.val[i]);
        }
    }
    return spline_eval(t, y, n);
}

}  // namespace

ExtremaCounts count_extrema_zero_crossings(std::span<const double> x) {
    if (x.size() < 3)
        throw InputError("count_extrema_zero_crossings: need at least 3 samples, got " +
                         std::to_string(x.size()));
    ExtremaCounts c;
    c.n_extrema = static_cast<int>(find_extrema(x, true).pos.size() +
                                   find_extrema(x, false).pos.size());
    int last_sign = 0;
    for (double v : x) {
        const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
        if (s == 0) continue;
        if (last_sign != 0 && s != last_sign) ++c.n_zero_crossings;
        last_sign = s;
    }
    return c;
}

bool imf_property_holds(std::span<const double> x) {
    const ExtremaCounts c = count_extrema_zero_crossings(x);
    return std::abs(c.n_extrema - c.n_zero_crossings) <= 1;
}

std::optional<std::pair<Signal, Signal>> spline_envelopes(std::span<const double> x) {
    const Extrema maxima = find_extrema(x, true);
    const Extrema minima = find_extrema(x, false);
    if (maxima.pos.size() < 2 || minima.pos.size() < 2) return std::nullopt;
    return std::make_pair(envelope(maxima, x.size()), envelope(minima, x.size()));
}

std::optional<Signal> sift(std::span<const double> x, const EmdConfig& cfg) {
    Signal h(x.begin(), x.end());
    for (int it = 0; it < cfg.max_sift_iterations; ++it) {
        auto envs = spline_envelopes(h);
        if (!envs) {
            if (it == 0) return std::nullopt;  // monotone residue
            break;
        }
        const Signal& upper = envs->first;
        const Signal& lower = envs->second;

        double sd_num = 0.0, sd_den = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            const double mean = 0.5 * (upper[i] + lower[i]);
            sd_num += mean * mean;
            sd_den += h[i] * h[i];
            h[i] -= mean;
        }
        const double sd = sd_den > 0.0 ? sd_num / sd_den : 0.0;
        if (sd < cfg.sift_sd_threshold && imf_property_holds(h)) break;
    }
    return h;
}

ImfSet decompose(std::span<const double> x, const EmdConfig& cfg) {
    ImfSet set;
    set.source_length = x.size();
    set.residue.assign(x.begin(), x.end());

    for (int k = 0; k < cfg.max_imfs; ++k) {
        auto imf = sift(set.residue, cfg);
        if (!imf) break;
        for (std::size_t i = 0; i < set.residue.size(); ++i) set.residue[i] -= (*imf)[i];
        set.imfs.push_back(std::move(*imf));
    }
    return set;
}

SelectedComponents select_components(std::span<const double> x, const ImfSet& imfset,
                                     const EmdConfig& cfg) {
    const std::size_t n = x.size();
    if (imfset.source_length != n)
        throw InputError("select_components: decomposition does not match the signal length");

    static const Signal kEmpty;
    const Signal& imf1 = imfset.imfs.size() > 0 ? imfset.imfs[0] : kEmpty;
    const Signal& imf2 = imfset.imfs.size() > 1 ? imfset.imfs[1] : kEmpty;
    auto at = [](const Signal& s, std::size_t i) { return i < s.size() ? s[i] : 0.0; };

    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = cfg.noise_level_from_abs_max ? std::abs(x[i]) : x[i];
        peak = std::max(peak, v);
    }
    const double v_n = cfg.alpha * peak;

    double num = 0.0, den = 0.0;
    std::size_t band_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = at(imf1, i);
        if (std::abs(a) <= v_n) {
            ++band_count;
            num += a * a;
            den += x[i] * x[i];
        }
    }

    double nlcr;
    if (band_count == 0) {
        nlcr = std::numeric_limits<double>::infinity();
    } else if (den == 0.0) {
        nlcr = num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
        nlcr = num / den;
    }

    bool merge = nlcr <= cfg.beta;
    if (cfg.invert_nlcr_branch) merge = !merge;

    SelectedComponents sel;
    sel.nlcr = nlcr;
    sel.noise_level_v_n = v_n;
    sel.merged_first_two = merge;
    sel.residue = imfset.residue;
    sel.imf.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        sel.imf[i] = merge ? at(imf1, i) + at(imf2, i) : at(imf1, i);
    return sel;
}

}  // namespace vfdet
