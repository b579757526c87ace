#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gaitforce/types.hpp"

namespace gaitforce {

/// One validation problem. Findings are data: the caller decides whether to
/// exclude, abort, or log.
struct Finding {
    std::string code;     // stable identifier, e.g. "stream_gap"
    std::string message;  // human-readable detail
    double t_begin = std::nan("");
    double t_end = std::nan("");
};

namespace detail {

inline double median_dt(const std::vector<double>& ts) {
    std::vector<double> dts;
    for (std::size_t i = 1; i < ts.size(); ++i) dts.push_back(ts[i] - ts[i - 1]);
    if (dts.empty()) return 0.0;
    std::nth_element(dts.begin(), dts.begin() + dts.size() / 2, dts.end());
    return dts[dts.size() / 2];
}

template <class GetT>
void check_stream_times(const std::string& name, std::size_t n, GetT&& t_of,
                        std::vector<Finding>& out) {
    std::vector<double> ts(n);
    for (std::size_t i = 0; i < n; ++i) ts[i] = t_of(i);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(ts[i])) {
            out.push_back({"nonfinite_time", strfmt("%s: non-finite timestamp at sample %zu",
                                                    name.c_str(), i)});
            return;
        }
        if (i > 0 && ts[i] <= ts[i - 1]) {
            out.push_back({"nonmonotonic_time",
                           strfmt("%s: timestamps not strictly increasing at sample %zu",
                                  name.c_str(), i),
                           ts[i - 1], ts[i]});
            return;
        }
    }
    // Gap rule: anything wider than 3 nominal sample periods is a recording
    // hole. Nominal period is the median spacing, so one gap cannot hide
    // itself by inflating the estimate.
    const double dt = median_dt(ts);
    if (dt <= 0.0) return;
    for (std::size_t i = 1; i < n; ++i) {
        if (ts[i] - ts[i - 1] > 3.0 * dt) {
            out.push_back({"stream_gap",
                           strfmt("%s: gap of %.6f s (nominal period %.6f s)", name.c_str(),
                                  ts[i] - ts[i - 1], dt),
                           ts[i - 1], ts[i]});
        }
    }
}

}  // namespace detail

/// Checks a trial against the recording invariants. Returns an empty list iff
/// the trial is usable: positive body weight, a known treadmill speed, per
/// stream strictly increasing timestamps, finite values, pressure frames that
/// match the layout, and no gap wider than 3 nominal sample periods.
inline std::vector<Finding> validate_trial(const TrialRecord& trial,
                                           const SensorArrayLayout& layout) {
    std::vector<Finding> out;
    if (!(trial.body_weight_n > 0.0))
        out.push_back({"body_weight", strfmt("body_weight must be > 0 N, got %g",
                                             trial.body_weight_n)});
    bool speed_known = false;
    for (double s : kSpeedsMps) speed_known = speed_known || std::abs(trial.speed_mps - s) < 1e-9;
    if (!speed_known)
        out.push_back({"speed", strfmt("speed %g m/s is not one of 0.7/1.0/1.4", trial.speed_mps)});

    for (FootSide foot : kBothFeet) {
        const std::string side = to_string(foot);
        const auto& press = trial.pressure[foot];
        detail::check_stream_times(side + " pressure", press.size(),
                                   [&](std::size_t i) { return press[i].t; }, out);
        for (std::size_t i = 0; i < press.size(); ++i) {
            if (press[i].values.size() != layout.sensor_count()) {
                out.push_back({"pressure_shape",
                               strfmt("%s pressure frame %zu has %zu values, layout has %zu",
                                      side.c_str(), i, press[i].values.size(),
                                      layout.sensor_count())});
                break;
            }
            bool ok = true;
            for (double v : press[i].values) ok = ok && std::isfinite(v) && v >= 0.0;
            if (!ok) {
                out.push_back({"pressure_values",
                               strfmt("%s pressure frame %zu has negative or non-finite values",
                                      side.c_str(), i),
                               press[i].t, press[i].t});
                break;
            }
        }

        const auto& imu = trial.imu[foot];
        detail::check_stream_times(side + " imu", imu.size(),
                                   [&](std::size_t i) { return imu[i].t; }, out);
        for (std::size_t i = 0; i < imu.size(); ++i) {
            const auto& s = imu[i];
            if (!all_finite(s.accel.begin(), s.accel.end()) ||
                !all_finite(s.gyro.begin(), s.gyro.end())) {
                out.push_back({"imu_values",
                               strfmt("%s imu sample %zu has non-finite components", side.c_str(), i),
                               s.t, s.t});
                break;
            }
        }

        const auto& vgrf = trial.vgrf[foot];
        detail::check_stream_times(side + " vgrf", vgrf.size(),
                                   [&](std::size_t i) { return vgrf[i].t; }, out);
        for (std::size_t i = 0; i < vgrf.size(); ++i) {
            if (!std::isfinite(vgrf[i].value)) {
                out.push_back({"vgrf_values",
                               strfmt("%s vgrf sample %zu is non-finite", side.c_str(), i),
                               vgrf[i].t, vgrf[i].t});
                break;
            }
        }
    }
    return out;
}

}  // namespace gaitforce
