#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gaitforce/common.hpp"
#include "gaitforce/types.hpp"

namespace gaitforce {

/// Per-sensor ON/OFF decision levels. A sensor counts as pressed when its raw
/// reading reaches mean + 3 sigma of its swing-phase baseline, which makes
/// the switch behaviour immune to slow drift and hysteresis of the raw
/// pressure values.
struct AdaptiveThresholds {
    std::vector<double> at;             // device units, one per sensor
    std::size_t swing_sample_count = 0;
};

struct SensorStateFrame {
    double t = 0.0;
    std::vector<std::uint8_t> states;  // 0 or 1 per sensor

    std::size_t pressed_count() const {
        std::size_t n = 0;
        for (auto s : states) n += s;
        return n;
    }
};

/// Centroid of the pressed sensors for one frame. When nothing is pressed
/// (swing), x/y hold the last stance centroid and pressed_count is 0; the
/// sentinel keeps downstream normalization free of NaNs and is overwritten by
/// window padding anyway.
struct CopsSample {
    double t = 0.0;
    double x = 0.0;  // mm, anterior-posterior
    double y = 0.0;  // mm, medial-lateral
    std::size_t pressed_count = 0;
};

/// Swing-phase calibration: AT_i = mean_i + 3 * sample std_i over the swing
/// frames (std with divisor n-1).
inline AdaptiveThresholds calibrate_thresholds(const std::vector<PressureFrame>& swing_frames) {
    if (swing_frames.size() < 10)
        fail(ErrorKind::TooFewSwingSamples,
             strfmt("need at least 10 swing frames, got %zu", swing_frames.size()));
    const std::size_t sensors = swing_frames.front().values.size();
    const double n = static_cast<double>(swing_frames.size());

    AdaptiveThresholds out;
    out.swing_sample_count = swing_frames.size();
    out.at.assign(sensors, 0.0);

    std::vector<double> mean(sensors, 0.0);
    for (const auto& f : swing_frames) {
        if (f.values.size() != sensors)
            fail(ErrorKind::LengthMismatch, "swing frames differ in sensor count");
        for (std::size_t i = 0; i < sensors; ++i) {
            if (!std::isfinite(f.values[i]))
                fail(ErrorKind::NonFiniteInput, strfmt("swing pressure of sensor %zu", i));
            mean[i] += f.values[i];
        }
    }
    for (auto& m : mean) m /= n;

    for (std::size_t i = 0; i < sensors; ++i) {
        double ss = 0.0;
        for (const auto& f : swing_frames) {
            const double d = f.values[i] - mean[i];
            ss += d * d;
        }
        const double sd = std::sqrt(ss / (n - 1.0));
        out.at[i] = mean[i] + 3.0 * sd;
    }
    return out;
}

/// Pressure switch: state is 1 iff reading >= threshold (ties press).
inline SensorStateFrame frame_states(const PressureFrame& frame,
                                     const AdaptiveThresholds& thresholds) {
    if (frame.values.size() != thresholds.at.size())
        fail(ErrorKind::LengthMismatch,
             strfmt("frame has %zu sensors, thresholds %zu", frame.values.size(),
                    thresholds.at.size()));
    SensorStateFrame out;
    out.t = frame.t;
    out.states.resize(frame.values.size());
    for (std::size_t i = 0; i < frame.values.size(); ++i)
        out.states[i] = frame.values[i] >= thresholds.at[i] ? 1 : 0;
    return out;
}

/// CoPS_x = sum(x_j s_j) / sum(s_j), same for y. All-off is a defined swing
/// state, not an error; the caller supplies the sentinel via `last`.
inline CopsSample cops_from_states(const SensorStateFrame& states, const SensorArrayLayout& layout,
                                   const CopsSample* last = nullptr) {
    if (states.states.size() != layout.sensor_count())
        fail(ErrorKind::LengthMismatch,
             strfmt("state vector has %zu sensors, layout %zu", states.states.size(),
                    layout.sensor_count()));
    CopsSample out;
    out.t = states.t;
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < states.states.size(); ++i) {
        if (states.states[i]) {
            sx += layout.coords[i][0];
            sy += layout.coords[i][1];
            ++n;
        }
    }
    out.pressed_count = n;
    if (n > 0) {
        out.x = sx / static_cast<double>(n);
        out.y = sy / static_cast<double>(n);
    } else if (last != nullptr) {
        out.x = last->x;
        out.y = last->y;
    }
    return out;
}

/// Eq. (1)-(3) composed over a time-ordered stream: one CoPS sample per
/// frame. During swing the centroid holds its last stance value
/// (pressed_count flags it), starting at the layout centre before the first
/// stance.
inline std::vector<CopsSample> cops_stream(const std::vector<PressureFrame>& frames,
                                           const AdaptiveThresholds& thresholds,
                                           const SensorArrayLayout& layout) {
    std::vector<CopsSample> out;
    out.reserve(frames.size());
    CopsSample last;
    const auto bb = layout.bounding_box();
    last.x = (bb[0] + bb[1]) / 2.0;
    last.y = (bb[2] + bb[3]) / 2.0;
    for (const auto& f : frames) {
        const auto s = frame_states(f, thresholds);
        CopsSample c = cops_from_states(s, layout, &last);
        if (c.pressed_count > 0) last = c;
        out.push_back(c);
    }
    return out;
}

/// Deterministic swing-frame selection for calibration: frames from the
/// first `window_s` seconds whose total raw pressure is below `frac` of the
/// whole trial's 95th-percentile total.
inline std::vector<PressureFrame> select_swing_frames(const std::vector<PressureFrame>& frames,
                                                      double window_s = 5.0, double frac = 0.02) {
    std::vector<double> totals(frames.size(), 0.0);
    for (std::size_t i = 0; i < frames.size(); ++i)
        for (double v : frames[i].values) totals[i] += v;
    if (frames.empty()) return {};

    std::vector<double> sorted = totals;
    std::sort(sorted.begin(), sorted.end());
    const double p95 = sorted[static_cast<std::size_t>(0.95 * (sorted.size() - 1))];
    const double cutoff = frac * p95;
    const double t_end = frames.front().t + window_s;

    std::vector<PressureFrame> swing;
    for (std::size_t i = 0; i < frames.size() && frames[i].t < t_end; ++i)
        if (totals[i] < cutoff) swing.push_back(frames[i]);
    return swing;
}

}  // namespace gaitforce
