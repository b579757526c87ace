#pragma once

#include <cmath>
#include <vector>

#include "gaitforce/common.hpp"

namespace gaitforce {

inline double rmse(const std::vector<double>& ref, const std::vector<double>& est) {
    if (ref.size() != est.size())
        fail(ErrorKind::LengthMismatch,
             strfmt("rmse: %zu vs %zu samples", ref.size(), est.size()));
    if (ref.empty()) fail(ErrorKind::EmptyData, "rmse of empty series");
    double ss = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double d = est[i] - ref[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(ref.size()));
}

inline double series_range(const std::vector<double>& v) {
    if (v.empty()) fail(ErrorKind::EmptyData, "range of empty series");
    double lo = v[0], hi = v[0];
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return hi - lo;
}

/// RMSE normalized by the reference range, in percent.
inline double nrmse_percent(const std::vector<double>& ref, const std::vector<double>& est) {
    const double range = series_range(ref);
    if (!(range > 0.0)) fail(ErrorKind::ZeroRange, "reference series is constant");
    return 100.0 * rmse(ref, est) / range;
}

/// Pearson correlation, population convention (the n factors cancel).
inline double pearson_r(const std::vector<double>& ref, const std::vector<double>& est) {
    if (ref.size() != est.size())
        fail(ErrorKind::LengthMismatch,
             strfmt("pearson_r: %zu vs %zu samples", ref.size(), est.size()));
    if (ref.size() < 2) fail(ErrorKind::EmptyData, "pearson_r needs at least 2 samples");
    const double n = static_cast<double>(ref.size());
    double mr = 0.0, me = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        mr += ref[i];
        me += est[i];
    }
    mr /= n;
    me /= n;
    double cov = 0.0, vr = 0.0, ve = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double a = ref[i] - mr, b = est[i] - me;
        cov += a * b;
        vr += a * a;
        ve += b * b;
    }
    if (!(vr > 0.0) || !(ve > 0.0))
        fail(ErrorKind::ConstantSeries, "pearson_r of a constant series");
    return cov / std::sqrt(vr * ve);
}

}  // namespace gaitforce
