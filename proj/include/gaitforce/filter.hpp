#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gaitforce/common.hpp"

namespace gaitforce {

/// One second-order section, direct form II transposed. Coefficients are
/// normalized (a0 == 1).
struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;

    /// In-place single pass. The state starts at the step steady-state for
    /// the first sample, so a constant series passes through unchanged.
    void apply(std::vector<double>& x) const {
        if (x.empty()) return;
        const double zi1 = b1 + b2 - a1 - a2;
        const double zi2 = b2 - a2;
        double z1 = zi1 * x.front();
        double z2 = zi2 * x.front();
        for (double& v : x) {
            const double in = v;
            const double out = b0 * in + z1;
            z1 = b1 * in - a1 * out + z2;
            z2 = b2 * in - a2 * out;
            v = out;
        }
    }
};

/// Butterworth low-pass as cascaded biquads (order must be even). Bilinear
/// transform with the usual tan pre-warp; each section has DC gain exactly 1.
inline std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double sample_hz) {
    if (order < 2 || order % 2 != 0)
        fail(ErrorKind::ConfigError, strfmt("filter order must be even and >= 2, got %d", order));
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_hz / 2.0))
        fail(ErrorKind::ConfigError,
             strfmt("cutoff %.3f Hz must lie in (0, %.3f)", cutoff_hz, sample_hz / 2.0));
    const double k = std::tan(M_PI * cutoff_hz / sample_hz);
    std::vector<Biquad> sections;
    for (int pair = 0; pair < order / 2; ++pair) {
        // Analog prototype pole pair: s^2 + 2 zeta s + 1, zeta = sin of the
        // pole angle off the imaginary axis.
        const double zeta = std::sin(M_PI * (2.0 * pair + 1.0) / (2.0 * order));
        const double a0 = 1.0 + 2.0 * zeta * k + k * k;
        Biquad s;
        s.b0 = k * k / a0;
        s.b1 = 2.0 * s.b0;
        s.b2 = s.b0;
        s.a1 = 2.0 * (k * k - 1.0) / a0;
        s.a2 = (1.0 - 2.0 * zeta * k + k * k) / a0;
        sections.push_back(s);
    }
    return sections;
}

/// Forward-backward ("zero-phase") low-pass. The recursive filter runs once
/// forward and once backward, which squares the magnitude response and
/// cancels the phase. Edges use reflective padding of 3x the filter order,
/// mirrored point-symmetrically about the end values, trimmed afterwards.
inline std::vector<double> zero_phase_lowpass(const std::vector<double>& series, double sample_hz,
                                              double cutoff_hz = 10.0, int order = 4) {
    const std::size_t pad = static_cast<std::size_t>(3 * order);
    if (series.size() < pad)
        fail(ErrorKind::TooShort,
             strfmt("series of %zu samples is shorter than 3x filter order (%zu)", series.size(),
                    pad));
    if (!all_finite(series)) fail(ErrorKind::NonFiniteInput, "zero_phase_lowpass input");

    std::vector<double> x;
    x.reserve(series.size() + 2 * pad);
    for (std::size_t i = 0; i < pad; ++i) x.push_back(2.0 * series.front() - series[pad - i]);
    x.insert(x.end(), series.begin(), series.end());
    const std::size_t n = series.size();
    for (std::size_t i = 0; i < pad; ++i) x.push_back(2.0 * series.back() - series[n - 2 - i]);

    const auto sections = butterworth_lowpass(order, cutoff_hz, sample_hz);
    for (const auto& s : sections) s.apply(x);
    std::reverse(x.begin(), x.end());
    for (const auto& s : sections) s.apply(x);
    std::reverse(x.begin(), x.end());

    return std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(pad),
                               x.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

}  // namespace gaitforce
