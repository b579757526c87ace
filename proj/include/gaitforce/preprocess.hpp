#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gaitforce/cops.hpp"
#include "gaitforce/manifest.hpp"
#include "gaitforce/orientation.hpp"
#include "gaitforce/types.hpp"
#include "gaitforce/validate.hpp"

namespace gaitforce {

struct PreprocessOptions {
    double contact_threshold_bw = 0.05;  // shared with stance detection
    double debounce_s = 0.05;
    double settle_s = 2.0;          // orientation-filter settle, discarded
    double swing_window_s = 5.0;    // threshold calibration source region
    double swing_total_frac = 0.02;
    double sync_max_rms_s = 0.03;
    double orientation_beta = 0.1;
    std::size_t max_cycles_per_foot = 0;  // 0 = keep all
};

/// Heel contact times and stance intervals per foot, all on one timebase.
struct GaitEventSeries {
    PerFoot<std::vector<double>> heel_contacts;
    PerFoot<std::vector<std::pair<double, double>>> stance_intervals;
};

/// One gait cycle padded to a fixed 2 s window. x is channel-major
/// [channels x 200]; samples at indices >= valid_length are padding (vGRF 0,
/// feature channels hold their last in-cycle value, i.e. the swing sentinel).
struct GaitCycleWindow {
    std::string subject_id;
    double speed_mps = 0.0;
    FootSide foot = FootSide::Left;
    int cycle_index = 0;
    std::vector<std::vector<double>> x;  // [C][kWindowSamples]
    std::vector<double> y;               // [kWindowSamples], BW
    std::size_t valid_length = 0;
};

/// A bag of windows sharing one channel manifest.
struct WindowSet {
    ChannelManifest manifest = ChannelManifest::standard(FeatureSet::T3);
    bool normalized = false;
    std::vector<GaitCycleWindow> windows;
};

inline std::vector<double> normalize_vgrf(const std::vector<double>& raw_newtons,
                                          double body_weight_n) {
    if (!(body_weight_n > 0.0))
        fail(ErrorKind::NonPositiveBodyWeight, strfmt("body weight %g N", body_weight_n));
    std::vector<double> out(raw_newtons.size());
    for (std::size_t i = 0; i < raw_newtons.size(); ++i) out[i] = raw_newtons[i] / body_weight_n;
    return out;
}

/// 2x upsampling by midpoint linear interpolation. Original samples are
/// preserved exactly; output length is 2n - 1.
inline std::vector<double> upsample_2x(const std::vector<double>& values) {
    if (values.size() < 2) fail(ErrorKind::TooShort, "upsample_2x needs >= 2 samples");
    std::vector<double> out;
    out.reserve(values.size() * 2 - 1);
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        out.push_back(values[i]);
        out.push_back(0.5 * (values[i] + values[i + 1]));
    }
    out.push_back(values.back());
    return out;
}

/// Contact at each off->on transition of pressed_count that stays on for the
/// debounce interval.
inline std::vector<double> detect_heel_contacts_insole(const std::vector<SensorStateFrame>& states,
                                                       double debounce_s = 0.05) {
    std::vector<double> contacts;
    std::vector<std::size_t> pressed(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) pressed[i] = states[i].pressed_count();
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (pressed[i] == 0 || (i > 0 && pressed[i - 1] != 0)) continue;
        bool held = true;
        for (std::size_t j = i; j < states.size() && states[j].t < states[i].t + debounce_s; ++j)
            held = held && pressed[j] > 0;
        if (held) contacts.push_back(states[i].t);
    }
    return contacts;
}

/// Contact at each strict upward crossing of the threshold that stays above
/// it for the debounce interval.
inline std::vector<double> detect_heel_contacts_vgrf(const std::vector<ForceSample>& vgrf_bw,
                                                     double threshold_bw = 0.05,
                                                     double debounce_s = 0.05) {
    std::vector<double> contacts;
    for (std::size_t i = 1; i < vgrf_bw.size(); ++i) {
        if (!(vgrf_bw[i].value > threshold_bw) || vgrf_bw[i - 1].value > threshold_bw) continue;
        bool held = true;
        for (std::size_t j = i; j < vgrf_bw.size() && vgrf_bw[j].t < vgrf_bw[i].t + debounce_s; ++j)
            held = held && vgrf_bw[j].value > threshold_bw;
        if (held) contacts.push_back(vgrf_bw[i].t);
    }
    return contacts;
}

/// Clock offset between the insole and treadmill streams, defined as
/// (insole time - treadmill time) of the same physical contact. Subtracting
/// the offset from insole timestamps aligns them to the treadmill timebase.
/// Events are matched in order after aligning the first contacts, skipping
/// treadmill events with no insole counterpart; the offset is the median of
/// the matched differences.
inline double synchronize(const std::vector<double>& insole_events,
                          const std::vector<double>& treadmill_events,
                          double max_rms_s = 0.03) {
    if (insole_events.size() < 3 || treadmill_events.size() < 3)
        fail(ErrorKind::InsufficientEvents,
             strfmt("need >= 3 contacts per side, got %zu and %zu", insole_events.size(),
                    treadmill_events.size()));
    const double first_shift = insole_events.front() - treadmill_events.front();

    std::vector<double> diffs;
    std::size_t j = 0;
    for (double e : insole_events) {
        const double target = e - first_shift;
        while (j + 1 < treadmill_events.size() &&
               std::abs(treadmill_events[j + 1] - target) <= std::abs(treadmill_events[j] - target))
            ++j;
        diffs.push_back(e - treadmill_events[j]);
    }
    std::vector<double> sorted = diffs;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double offset =
        n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    double ss = 0.0;
    for (double d : diffs) ss += (d - offset) * (d - offset);
    const double rms = std::sqrt(ss / static_cast<double>(n));
    if (rms > max_rms_s)
        fail(ErrorKind::PoorAlignment, strfmt("post-alignment RMS %.4f s exceeds %.4f s", rms,
                                              max_rms_s));
    return offset;
}

/// All channels of one trial resampled onto the reference 100 Hz grid,
/// synchronized and ready for windowing.
struct ProcessedTrial {
    std::string subject_id;
    double speed_mps = 0.0;
    double body_weight_n = 0.0;
    double t0 = 0.0;
    double dt = 1.0 / kReferenceRateHz;
    std::size_t n = 0;
    ChannelManifest manifest = ChannelManifest::standard(FeatureSet::T3);
    std::vector<std::vector<double>> channels;  // [22][n]
    PerFoot<std::vector<double>> vgrf_bw;       // [n]
    GaitEventSeries events;                     // reference timebase
    double sync_offset_s = 0.0;                 // recovered insole-minus-treadmill offset
};

namespace detail {

/// Nearest-sample resampling of a uniform series onto a destination grid.
/// `shift` is added to destination times before the source lookup; ends hold.
inline std::vector<double> resample_to_grid(const std::vector<double>& values, double t0_src,
                                            double dt_src, double t0_dst, double dt_dst,
                                            std::size_t n_dst, double shift) {
    std::vector<double> out(n_dst);
    const std::ptrdiff_t last = static_cast<std::ptrdiff_t>(values.size()) - 1;
    for (std::size_t i = 0; i < n_dst; ++i) {
        const double t = t0_dst + dt_dst * static_cast<double>(i) + shift;
        std::ptrdiff_t idx = std::llround((t - t0_src) / dt_src);
        idx = std::clamp<std::ptrdiff_t>(idx, 0, last);
        out[i] = values[static_cast<std::size_t>(idx)];
    }
    return out;
}

inline double stream_dt(const std::vector<double>& ts) {
    const double dt = median_dt(ts);
    if (!(dt > 0.0)) fail(ErrorKind::TooShort, "stream too short to estimate sample period");
    return dt;
}

}  // namespace detail

/// Runs the per-trial pipeline: threshold calibration, sensor states, CoPS,
/// orientation angles, BW normalization, 2x upsampling, event detection,
/// synchronization, and grid alignment.
inline ProcessedTrial build_processed_trial(const TrialRecord& trial,
                                            const SensorArrayLayout& layout,
                                            const PreprocessOptions& opt = {}) {
    ProcessedTrial out;
    out.subject_id = trial.subject_id;
    out.speed_mps = trial.speed_mps;
    out.body_weight_n = trial.body_weight_n;
    out.manifest = ChannelManifest::standard(FeatureSet::T3);

    // Reference grid comes from the treadmill stream (both feet share it).
    const auto& ref = trial.vgrf.left;
    if (ref.size() < 2 || trial.vgrf.right.size() < 2)
        fail(ErrorKind::TooShort, "reference vGRF stream too short");
    std::vector<double> ref_ts(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) ref_ts[i] = ref[i].t;
    out.t0 = ref.front().t;
    out.dt = detail::stream_dt(ref_ts);
    out.n = ref.size();

    out.channels.assign(out.manifest.channel_count(), {});

    PerFoot<std::vector<double>> insole_contacts;
    PerFoot<std::vector<double>> treadmill_contacts;
    PerFoot<double> insole_t0{}, insole_dt{};
    PerFoot<std::vector<SensorStateFrame>> state_streams;
    PerFoot<std::vector<std::vector<double>>> raw50;  // per foot: 11 channels at 50 Hz

    for (FootSide foot : kBothFeet) {
        const auto& press = trial.pressure[foot];
        const auto& imu = trial.imu[foot];
        if (press.size() < 2 || imu.size() < 2)
            fail(ErrorKind::TooShort, std::string(to_string(foot)) + " insole stream too short");

        const auto swing = select_swing_frames(press, opt.swing_window_s, opt.swing_total_frac);
        const auto thresholds = calibrate_thresholds(swing);
        auto& states = state_streams[foot];
        states.reserve(press.size());
        for (const auto& f : press) states.push_back(frame_states(f, thresholds));
        const auto cops = cops_stream(press, thresholds, layout);

        std::vector<double> imu_ts(imu.size());
        for (std::size_t i = 0; i < imu.size(); ++i) imu_ts[i] = imu[i].t;
        OrientationState ori;
        ori.beta = opt.orientation_beta;
        ori.dt = detail::stream_dt(imu_ts);

        auto& ch = raw50[foot];
        ch.assign(11, std::vector<double>(imu.size()));
        for (std::size_t i = 0; i < imu.size(); ++i) {
            ori = update(ori, imu[i].gyro, imu[i].accel);
            const auto ang = angles(ori);
            for (int a = 0; a < 3; ++a) {
                ch[0 + a][i] = imu[i].accel[a];
                ch[3 + a][i] = ang[a];
                ch[6 + a][i] = imu[i].gyro[a];
            }
        }
        // CoPS shares the pressure timebase; in a well-formed trial it equals
        // the IMU timebase. Resample defensively onto the IMU grid.
        std::vector<double> press_ts(press.size());
        for (std::size_t i = 0; i < press.size(); ++i) press_ts[i] = press[i].t;
        const double press_dt = detail::stream_dt(press_ts);
        std::vector<double> cx(cops.size()), cy(cops.size());
        for (std::size_t i = 0; i < cops.size(); ++i) {
            cx[i] = cops[i].x;
            cy[i] = cops[i].y;
        }
        ch[9] = detail::resample_to_grid(cx, press.front().t, press_dt, imu.front().t, ori.dt,
                                         imu.size(), 0.0);
        ch[10] = detail::resample_to_grid(cy, press.front().t, press_dt, imu.front().t, ori.dt,
                                          imu.size(), 0.0);

        insole_t0[foot] = imu.front().t;
        insole_dt[foot] = ori.dt;
        insole_contacts[foot] = detect_heel_contacts_insole(states, opt.debounce_s);

        const auto bw = normalize_vgrf(
            [&] {
                std::vector<double> v(trial.vgrf[foot].size());
                for (std::size_t i = 0; i < v.size(); ++i) v[i] = trial.vgrf[foot][i].value;
                return v;
            }(),
            trial.body_weight_n);
        std::vector<ForceSample> bw_series(trial.vgrf[foot].size());
        for (std::size_t i = 0; i < bw_series.size(); ++i)
            bw_series[i] = {trial.vgrf[foot][i].t, bw[i]};
        treadmill_contacts[foot] = detect_heel_contacts_vgrf(bw_series, opt.contact_threshold_bw,
                                                             opt.debounce_s);
        out.vgrf_bw[foot] = detail::resample_to_grid(bw, trial.vgrf[foot].front().t,
                                                     detail::stream_dt([&] {
                                                         std::vector<double> ts(bw_series.size());
                                                         for (std::size_t i = 0; i < ts.size(); ++i)
                                                             ts[i] = bw_series[i].t;
                                                         return ts;
                                                     }()),
                                                     out.t0, out.dt, out.n, 0.0);
    }

    // One offset per trial: both feet share the insole clock, so pool the
    // contacts of both feet for the sync estimate.
    std::vector<double> ins_all, tre_all;
    for (FootSide foot : kBothFeet) {
        ins_all.insert(ins_all.end(), insole_contacts[foot].begin(), insole_contacts[foot].end());
        tre_all.insert(tre_all.end(), treadmill_contacts[foot].begin(),
                       treadmill_contacts[foot].end());
    }
    std::sort(ins_all.begin(), ins_all.end());
    std::sort(tre_all.begin(), tre_all.end());
    double offset = synchronize(ins_all, tre_all, opt.sync_max_rms_s);
    // Snap to the reference grid so aligned samples land on grid points.
    offset = std::round(offset / out.dt) * out.dt;
    out.sync_offset_s = offset;

    for (FootSide foot : kBothFeet) {
        // 50 -> 100 Hz, then align onto the reference grid (de-skewed).
        for (std::size_t c = 0; c < 11; ++c) {
            const auto up = upsample_2x(raw50[foot][c]);
            const std::size_t global_idx =
                c < 9 ? out.manifest.index_of(foot, c < 3 ? "accel" : c < 6 ? "angle" : "gyro",
                                              std::string(1, "xyz"[c % 3]))
                      : out.manifest.index_of(foot, "cops", c == 9 ? "x" : "y");
            out.channels[global_idx] =
                detail::resample_to_grid(up, insole_t0[foot], insole_dt[foot] / 2.0, out.t0,
                                         out.dt, out.n, offset);
        }
        auto& contacts = out.events.heel_contacts[foot];
        for (double t : insole_contacts[foot]) contacts.push_back(t - offset);

        // Stance intervals: from each aligned contact until pressed_count
        // returns to zero.
        const auto& states = state_streams[foot];
        for (double tc : insole_contacts[foot]) {
            double t_end = tc;
            bool in_run = false;
            for (const auto& s : states) {
                if (s.t < tc) continue;
                if (s.pressed_count() > 0) {
                    t_end = s.t;
                    in_run = true;
                } else if (in_run) {
                    break;
                }
            }
            if (in_run && t_end > tc)
                out.events.stance_intervals[foot].push_back({tc - offset, t_end - offset});
        }
    }
    return out;
}

/// Cuts [contact_k, contact_{k+1}) windows on the grid. Cycles longer than
/// the 2 s window are excluded with a finding; cycles starting before the
/// orientation settle period are not used. Returns windows with raw
/// (unnormalized) channel values.
inline std::vector<GaitCycleWindow> segment_cycles(const ProcessedTrial& pt,
                                                   const PreprocessOptions& opt,
                                                   std::vector<Finding>* exclusions = nullptr) {
    std::vector<GaitCycleWindow> out;
    for (FootSide foot : kBothFeet) {
        const auto& contacts = pt.events.heel_contacts[foot];
        int cycle_index = 0;
        std::size_t kept = 0;
        for (std::size_t k = 0; k + 1 < contacts.size(); ++k) {
            if (contacts[k] < pt.t0 + opt.settle_s) continue;
            const std::ptrdiff_t i0 = std::llround((contacts[k] - pt.t0) / pt.dt);
            const std::ptrdiff_t i1 = std::llround((contacts[k + 1] - pt.t0) / pt.dt);
            ++cycle_index;
            if (i0 < 0 || i1 <= i0 || static_cast<std::size_t>(i1) > pt.n) continue;
            const std::size_t len = static_cast<std::size_t>(i1 - i0);
            if (len > static_cast<std::size_t>(kWindowSamples)) {
                if (exclusions)
                    exclusions->push_back({"cycle_too_long",
                                           strfmt("%s %s cycle %d lasts %.3f s (> %.1f s window)",
                                                  pt.subject_id.c_str(), to_string(foot),
                                                  cycle_index, len * pt.dt,
                                                  kWindowSamples * pt.dt),
                                           contacts[k], contacts[k + 1]});
                continue;
            }
            if (opt.max_cycles_per_foot && kept >= opt.max_cycles_per_foot) break;

            GaitCycleWindow w;
            w.subject_id = pt.subject_id;
            w.speed_mps = pt.speed_mps;
            w.foot = foot;
            w.cycle_index = cycle_index;
            w.valid_length = len;
            w.x.assign(pt.channels.size(), std::vector<double>(kWindowSamples));
            w.y.assign(kWindowSamples, 0.0);
            for (std::size_t c = 0; c < pt.channels.size(); ++c) {
                const auto& src = pt.channels[c];
                for (std::size_t i = 0; i < len; ++i)
                    w.x[c][i] = src[static_cast<std::size_t>(i0) + i];
                for (std::size_t i = len; i < static_cast<std::size_t>(kWindowSamples); ++i)
                    w.x[c][i] = w.x[c][len - 1];  // hold swing tail
            }
            const auto& vg = pt.vgrf_bw[foot];
            for (std::size_t i = 0; i < len; ++i)
                w.y[i] = std::max(0.0, vg[static_cast<std::size_t>(i0) + i]);
            out.push_back(std::move(w));
            ++kept;
        }
    }
    return out;
}

/// Per-channel (min, max) fitted on training windows only.
struct MinMaxScaler {
    std::vector<std::pair<double, double>> per_channel;
};

inline MinMaxScaler fit_minmax(const WindowSet& set, const std::vector<std::size_t>& train_idx) {
    if (train_idx.empty()) fail(ErrorKind::EmptyData, "fit_minmax with no training windows");
    const std::size_t C = set.manifest.channel_count();
    MinMaxScaler s;
    s.per_channel.assign(C, {std::numeric_limits<double>::infinity(),
                             -std::numeric_limits<double>::infinity()});
    for (std::size_t wi : train_idx) {
        const auto& w = set.windows.at(wi);
        for (std::size_t c = 0; c < C; ++c)
            for (double v : w.x[c]) {
                s.per_channel[c].first = std::min(s.per_channel[c].first, v);
                s.per_channel[c].second = std::max(s.per_channel[c].second, v);
            }
    }
    return s;
}

/// x' = (x - min) / (max - min), clamped to [0, 1] so held-out data cannot
/// escape the training range; degenerate channels map to 0.5.
inline GaitCycleWindow apply_minmax(const GaitCycleWindow& w, const MinMaxScaler& s) {
    GaitCycleWindow out = w;
    for (std::size_t c = 0; c < w.x.size(); ++c) {
        const auto [lo, hi] = s.per_channel.at(c);
        for (double& v : out.x[c]) {
            if (hi > lo)
                v = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
            else
                v = 0.5;
        }
    }
    return out;
}

/// Inverse of apply_minmax on non-clamped values.
inline GaitCycleWindow inverse_minmax(const GaitCycleWindow& w, const MinMaxScaler& s) {
    GaitCycleWindow out = w;
    for (std::size_t c = 0; c < w.x.size(); ++c) {
        const auto [lo, hi] = s.per_channel.at(c);
        for (double& v : out.x[c]) v = hi > lo ? lo + v * (hi - lo) : lo;
    }
    return out;
}

}  // namespace gaitforce
