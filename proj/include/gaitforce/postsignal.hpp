#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gaitforce/common.hpp"
#include "gaitforce/filter.hpp"
#include "gaitforce/types.hpp"

namespace gaitforce {

enum class ModelKind { Mlp, Forest, Lstm };

inline const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Mlp: return "mlp";
        case ModelKind::Forest: return "rf";
        case ModelKind::Lstm: return "lstm";
    }
    return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
    if (s == "mlp" || s == "ann") return ModelKind::Mlp;
    if (s == "rf" || s == "forest") return ModelKind::Forest;
    if (s == "lstm") return ModelKind::Lstm;
    fail(ErrorKind::ConfigError, "unknown model kind '" + s + "'");
}

/// Characteristic peaks of one gait cycle: weight acceptance peak (first half
/// of stance) and push-off peak (second half). Times are fractions of the
/// gait cycle in [0, 1).
struct PeakPair {
    double wap_value = 0.0;  // BW
    double wap_time = 0.0;   // fraction of gait cycle
    double pop_value = 0.0;
    double pop_time = 0.0;
    std::size_t stance_begin = 0;  // sample indices, inclusive
    std::size_t stance_end = 0;
};

struct PeakErrors {
    double wap_err_bw = 0.0;    // |est - ref|
    double pop_err_bw = 0.0;
    double wap_delay_gc = 0.0;  // signed, percent of gait cycle, positive = delay
    double pop_delay_gc = 0.0;
};

/// Longest contiguous run of samples above the stance threshold, inclusive
/// indices. Throws NoStanceFound on unloaded windows; the caller skips those
/// in peak statistics.
inline std::pair<std::size_t, std::size_t> detect_stance(const std::vector<double>& vgrf_bw,
                                                         double threshold_bw = 0.05) {
    std::size_t best_start = 0, best_len = 0;
    std::size_t run_start = 0, run_len = 0;
    for (std::size_t i = 0; i < vgrf_bw.size(); ++i) {
        if (vgrf_bw[i] > threshold_bw) {
            if (run_len == 0) run_start = i;
            ++run_len;
            if (run_len > best_len) {
                best_len = run_len;
                best_start = run_start;
            }
        } else {
            run_len = 0;
        }
    }
    if (best_len == 0) fail(ErrorKind::NoStanceFound, "no sample above stance threshold");
    return {best_start, best_start + best_len - 1};
}

/// WAP = argmax over the first half of stance, POP = argmax over the second
/// half; ties break toward the earliest index. Peak times are fractions of
/// the gait cycle (valid_length samples).
inline PeakPair extract_peaks(const std::vector<double>& vgrf_bw,
                              std::pair<std::size_t, std::size_t> stance,
                              std::size_t valid_length) {
    const auto [start, end] = stance;
    if (end < start || end >= vgrf_bw.size())
        fail(ErrorKind::ShapeMismatch, "stance interval outside window");
    const std::size_t len = end - start + 1;
    if (len < 4) fail(ErrorKind::StanceTooShort, strfmt("stance of %zu samples", len));
    if (valid_length == 0) fail(ErrorKind::ShapeMismatch, "valid_length must be positive");

    const std::size_t mid = start + len / 2;
    auto argmax = [&](std::size_t lo, std::size_t hi) {  // [lo, hi] inclusive
        std::size_t best = lo;
        for (std::size_t i = lo + 1; i <= hi; ++i)
            if (vgrf_bw[i] > vgrf_bw[best]) best = i;
        return best;
    };
    const std::size_t i_wap = argmax(start, mid - 1);
    const std::size_t i_pop = argmax(mid, end);

    PeakPair out;
    out.wap_value = vgrf_bw[i_wap];
    out.pop_value = vgrf_bw[i_pop];
    out.wap_time = static_cast<double>(i_wap) / static_cast<double>(valid_length);
    out.pop_time = static_cast<double>(i_pop) / static_cast<double>(valid_length);
    out.stance_begin = start;
    out.stance_end = end;
    return out;
}

/// Magnitude errors are absolute; timing errors are signed percent of gait
/// cycle (positive when the estimate lags the reference).
inline PeakErrors peak_errors(const PeakPair& ref, const PeakPair& est) {
    PeakErrors out;
    out.wap_err_bw = std::abs(est.wap_value - ref.wap_value);
    out.pop_err_bw = std::abs(est.pop_value - ref.pop_value);
    out.wap_delay_gc = (est.wap_time - ref.wap_time) * 100.0;
    out.pop_delay_gc = (est.pop_time - ref.pop_time) * 100.0;
    return out;
}

/// Post-estimation stages per model kind. Only the pointwise models (MLP,
/// RF) are smoothed; the LSTM path is filter-free.
inline std::vector<std::string> postprocess_plan(ModelKind kind) {
    if (kind == ModelKind::Lstm) return {};
    return {"zero_phase_lowpass_10hz"};
}

/// Applies the plan above to one estimated window.
inline std::vector<double> postprocess_estimate(ModelKind kind, const std::vector<double>& est,
                                                double sample_hz = kReferenceRateHz) {
    if (postprocess_plan(kind).empty()) return est;
    return zero_phase_lowpass(est, sample_hz, 10.0, 4);
}

}  // namespace gaitforce
