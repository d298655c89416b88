#include "doctest.h"

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "vfdet/errors.hpp"
#include "vfdet/filters.hpp"
#include "vfdet/rng.hpp"

using namespace vfdet;

namespace {
constexpr double kFs = 250.0;
}

TEST_CASE("remove_mean zeroes the mean and rejects empty input") {
    const std::vector<double> x{1.0, 2.0, 6.0};
    const auto y = remove_mean(x);
    CHECK(std::accumulate(y.begin(), y.end(), 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(y[0] == doctest::Approx(-2.0));
    CHECK_THROWS_AS(remove_mean(std::vector<double>{}), InputError);
}

TEST_CASE("moving average matches the causal partial-sum definition") {
    const std::vector<double> x{5, 0, 0, 0, 0, 0, 10, 10, 10, 10, 10};
    const auto y = moving_average(x, 5);
    REQUIRE(y.size() == x.size());
    CHECK(y[0] == doctest::Approx(1.0));   // 5/5
    CHECK(y[1] == doctest::Approx(1.0));   // (5+0)/5
    CHECK(y[4] == doctest::Approx(1.0));
    CHECK(y[5] == doctest::Approx(0.0));   // impulse left the window
    CHECK(y[10] == doctest::Approx(10.0));  // fully inside the plateau
    CHECK_THROWS_AS(moving_average(x, 0), InputError);
}

TEST_CASE("moving average nulls the tone at fs/order") {
    const double gain = oracle::probe_gain(
        [](const Signal& x) { return moving_average(x, 5); }, kFs / 5.0, kFs);
    CHECK(gain < 1e-10);
}

TEST_CASE("highpass suppresses drift and passes the band of interest") {
    auto hp = [](const Signal& x) { return highpass_drift(x, 1.0, kFs); };
    // A constant is rejected entirely once the transient decays.
    std::vector<double> dc(4000, 1.0);
    const auto y = hp(dc);
    double tail = 0.0;
    for (std::size_t i = y.size() - 500; i < y.size(); ++i) tail = std::max(tail, std::abs(y[i]));
    CHECK(tail < 0.01);

    CHECK(oracle::probe_gain(hp, 0.2, kFs, 20.0) < 0.05);
    const double mid = oracle::probe_gain(hp, 10.0, kFs, 8.0);
    CHECK(mid > 0.95);
    CHECK(mid < 1.12);
    // -3 dB point at the cutoff.
    CHECK(oracle::probe_gain(hp, 1.0, kFs, 20.0) == doctest::Approx(std::sqrt(0.5)).epsilon(0.05));
}

TEST_CASE("lowpass has the Butterworth corner and a steep stopband") {
    auto lp = [](const Signal& x) { return butterworth_lowpass(x, 20.0, kFs, 12); };
    CHECK(oracle::probe_gain(lp, 5.0, kFs, 8.0) == doctest::Approx(1.0).epsilon(0.005));
    CHECK(oracle::probe_gain(lp, 20.0, kFs, 8.0) ==
          doctest::Approx(std::sqrt(0.5)).epsilon(0.05));
    // Mains frequency lands far down the order-12 slope (theory ~1.4e-6).
    CHECK(oracle::probe_gain(lp, 60.0, kFs, 8.0) < 1e-5);
    CHECK(oracle::probe_gain(lp, 45.0, kFs, 8.0) < 1e-3);
}

TEST_CASE("butterworth design rejects bad parameters and stays stable") {
    CHECK_THROWS_AS(butterworth_sections(3, 20.0, kFs, false), InputError);   // odd order
    CHECK_THROWS_AS(butterworth_sections(0, 20.0, kFs, false), InputError);
    CHECK_THROWS_AS(butterworth_sections(2, 0.0, kFs, false), InputError);
    CHECK_THROWS_AS(butterworth_sections(2, 125.0, kFs, false), InputError);  // at Nyquist
    CHECK_THROWS_AS(butterworth_sections(2, 20.0, 0.0, false), InputError);

    for (int order : {2, 4, 12}) {
        for (double fc : {0.5, 1.0, 20.0, 100.0}) {
            for (bool hp : {false, true}) {
                const auto sections = butterworth_sections(order, fc, kFs, hp);
                CHECK(sections.size() == static_cast<std::size_t>(order / 2));
                for (const auto& s : sections) CHECK(s.pole_radius() < 1.0);
            }
        }
    }
}

TEST_CASE("cascade output length equals input length at every stage") {
    Rng rng(1);
    for (std::size_t n : {1u, 4u, 5u, 1250u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = rng.normal();
        CHECK(preprocess_pipeline(x, kFs).size() == n);
    }
}

TEST_CASE("pipeline is linear for zero-mean inputs") {
    Rng rng(5);
    std::vector<double> x(1250), y(1250);
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    const auto xm = remove_mean(x);
    const auto ym = remove_mean(y);
    std::vector<double> combo(1250);
    for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = 2.0 * xm[i] - 3.0 * ym[i];

    const auto px = preprocess_pipeline(xm, kFs);
    const auto py = preprocess_pipeline(ym, kFs);
    const auto pc = preprocess_pipeline(combo, kFs);
    for (std::size_t i = 0; i < combo.size(); ++i) {
        CHECK(pc[i] == doctest::Approx(2.0 * px[i] - 3.0 * py[i]).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("pipeline keeps a fibrillation-band tone and strips interference") {
    // 5 Hz rides through; 0.3 Hz drift and 60 Hz mains mostly disappear.
    const std::size_t n = static_cast<std::size_t>(8 * kFs);
    std::vector<double> clean(n), noisy(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / kFs;
        clean[i] = std::sin(2.0 * std::numbers::pi * 5.0 * t);
        noisy[i] = clean[i] + 0.8 * std::sin(2.0 * std::numbers::pi * 0.3 * t) +
                   0.5 * std::sin(2.0 * std::numbers::pi * 60.0 * t) + 0.4;
    }
    const auto out = preprocess_pipeline(noisy, kFs);
    // Compare against the conditioned clean tone over the settled tail.
    const auto ref = preprocess_pipeline(clean, kFs);
    double err = 0.0, ref_energy = 0.0;
    for (std::size_t i = n / 2; i < n; ++i) {
        err += (out[i] - ref[i]) * (out[i] - ref[i]);
        ref_energy += ref[i] * ref[i];
    }
    CHECK(std::sqrt(err / ref_energy) < 0.1);
}
