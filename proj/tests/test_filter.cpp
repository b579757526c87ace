#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "gaitforce/filter.hpp"

using namespace gaitforce;

namespace {

// Naive DFT amplitude at one frequency; test-only oracle.
double tone_amplitude(const std::vector<double>& x, double freq_hz, double fs) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double phase = -2.0 * M_PI * freq_hz * static_cast<double>(n) / fs;
        acc += x[n] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return 2.0 * std::abs(acc) / static_cast<double>(x.size());
}

std::vector<double> tone(double freq_hz, double fs, std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k)
        x[k] = std::sin(2.0 * M_PI * freq_hz * static_cast<double>(k) / fs);
    return x;
}

}  // namespace

TEST_CASE("DC gain is 1 within 1e-9") {
    const std::vector<double> x(300, 0.73);
    const auto y = zero_phase_lowpass(x, 100.0);
    for (double v : y) CHECK(std::abs(v - 0.73) < 1e-9);
}

TEST_CASE("2 Hz passes within 2 percent, 25 Hz attenuated by at least 20 dB") {
    const double fs = 100.0;
    const std::size_t n = 2000;
    const auto low = zero_phase_lowpass(tone(2.0, fs, n), fs);
    const auto high = zero_phase_lowpass(tone(25.0, fs, n), fs);
    CHECK(tone_amplitude(low, 2.0, fs) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(tone_amplitude(high, 25.0, fs) < 0.1);  // -20 dB of unit amplitude
}

TEST_CASE("a 5 Hz tone comes out with zero lag") {
    const double fs = 100.0;
    const auto x = tone(5.0, fs, 1000);
    const auto y = zero_phase_lowpass(x, fs);
    // cross-correlation over lags within half the tone period (10 samples);
    // the peak must sit at lag 0
    int best_lag = -99;
    double best = -1e18;
    for (int lag = -9; lag <= 9; ++lag) {
        double c = 0.0;
        for (std::size_t i = 100; i + 100 < x.size(); ++i)
            c += x[i] * y[static_cast<std::size_t>(static_cast<int>(i) + lag)];
        if (c > best) {
            best = c;
            best_lag = lag;
        }
    }
    CHECK(best_lag == 0);
}

TEST_CASE("filter is linear within 1e-9") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::size_t n = 256;
    std::vector<double> x(n), y(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = g(rng);
        y[i] = g(rng);
    }
    const double a = 1.7, b = -0.4;
    for (std::size_t i = 0; i < n; ++i) z[i] = a * x[i] + b * y[i];
    const auto fx = zero_phase_lowpass(x, 100.0);
    const auto fy = zero_phase_lowpass(y, 100.0);
    const auto fz = zero_phase_lowpass(z, 100.0);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(fz[i] - (a * fx[i] + b * fy[i])) < 1e-9);
}

TEST_CASE("applying the filter twice never amplifies any frequency component") {
    // The zero-phase pass has magnitude |H(w)|^2 of the designed cascade;
    // double application squares it again. Evaluate the implemented
    // coefficients on a dense grid: the gain never exceeds 1, so the second
    // application is a pointwise contraction.
    const auto sections = butterworth_lowpass(4, 10.0, 100.0);
    for (int k = 0; k <= 2000; ++k) {
        const double w = M_PI * static_cast<double>(k) / 2000.0;
        const std::complex<double> z(std::cos(w), std::sin(w));
        std::complex<double> h(1.0, 0.0);
        for (const auto& s : sections)
            h *= (s.b0 + s.b1 / z + s.b2 / (z * z)) / (1.0 + s.a1 / z + s.a2 / (z * z));
        const double once = std::norm(h);          // |H|^2: one zero-phase pass
        const double twice = once * once;
        CHECK(once <= 1.0 + 1e-12);
        CHECK(twice <= once + 1e-12);
    }

    // and at signal level, on a multi-tone with integer cycles per window
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> amp(0.2, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    const double fs = 100.0;
    const std::size_t n = 2048;
    std::vector<double> x(n, 0.0);
    std::vector<int> bins = {20, 102, 204, 410, 820};  // ~1, 5, 10, 20, 40 Hz
    std::vector<double> amps;
    for (int b : bins) {
        const double a = amp(rng), ph = phase(rng);
        amps.push_back(a);
        for (std::size_t k = 0; k < n; ++k)
            x[k] += a * std::sin(2.0 * M_PI * b * static_cast<double>(k) /
                                     static_cast<double>(n) +
                                 ph);
    }
    const auto once = zero_phase_lowpass(x, fs);
    const auto twice = zero_phase_lowpass(once, fs);
    for (std::size_t bi = 0; bi < bins.size(); ++bi) {
        const double f = fs * static_cast<double>(bins[bi]) / static_cast<double>(n);
        const double a1 = tone_amplitude(once, f, fs);
        const double a2 = tone_amplitude(twice, f, fs);
        CHECK(a2 <= a1 + 0.02 * amps[bi]);  // slack covers edge-padding leakage
    }
}

TEST_CASE("series shorter than 3x order is rejected") {
    CHECK_THROWS_WITH_AS(zero_phase_lowpass(std::vector<double>(11, 1.0), 100.0),
                         doctest::Contains("TooShort"), Error);
}

TEST_CASE("butterworth sections have unit DC gain and stable poles") {
    for (int order : {2, 4, 8}) {
        const auto sections = butterworth_lowpass(order, 10.0, 100.0);
        CHECK(static_cast<int>(sections.size()) == order / 2);
        for (const auto& s : sections) {
            const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
            CHECK(dc == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(std::abs(s.a2) < 1.0);  // necessary stability condition
        }
    }
}
