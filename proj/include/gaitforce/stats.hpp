#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "gaitforce/common.hpp"

namespace gaitforce {

/// Percentile with linear interpolation between order statistics
/// (index = p/100 * (n-1)).
inline double percentile(std::vector<double> v, double p) {
    if (v.empty()) fail(ErrorKind::EmptyData, "percentile of empty data");
    std::sort(v.begin(), v.end());
    const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

inline double mean(const std::vector<double>& v) {
    if (v.empty()) fail(ErrorKind::EmptyData, "mean of empty data");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Sample standard deviation (divisor n-1); 0 for fewer than 2 values.
inline double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct AnovaEffect {
    std::string factor;
    double ss = 0.0;
    int df = 0;
    double f = 0.0;
    double p = 1.0;
    bool no_variance = false;  // all observations equal; F is undefined
};

struct AnovaResult {
    AnovaEffect factor_a;
    AnovaEffect factor_b;
    AnovaEffect interaction;
    double ss_error = 0.0;
    int df_error = 0;
};

/// Balanced two-way fixed-effects ANOVA with replication. `cells[i][j]` holds
/// the observations of level i of factor A and level j of factor B; all cells
/// must have the same size >= 2.
inline AnovaResult anova_two_way(const std::vector<std::vector<std::vector<double>>>& cells,
                                 const std::string& name_a = "A",
                                 const std::string& name_b = "B") {
    const std::size_t a = cells.size();
    if (a < 2) fail(ErrorKind::DegenerateDesign, "factor A needs >= 2 levels");
    const std::size_t b = cells.front().size();
    if (b < 2) fail(ErrorKind::DegenerateDesign, "factor B needs >= 2 levels");
    std::size_t n = 0;
    for (const auto& row : cells) {
        if (row.size() != b) fail(ErrorKind::DegenerateDesign, "ragged factor B levels");
        for (const auto& cell : row) {
            if (n == 0) n = cell.size();
            if (cell.size() != n || n < 2)
                fail(ErrorKind::DegenerateDesign,
                     "cells must be balanced with >= 2 observations each");
        }
    }

    double grand = 0.0;
    std::vector<double> mean_a(a, 0.0), mean_b(b, 0.0);
    std::vector<std::vector<double>> mean_cell(a, std::vector<double>(b, 0.0));
    for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < b; ++j) {
            for (double y : cells[i][j]) mean_cell[i][j] += y;
            mean_cell[i][j] /= static_cast<double>(n);
            mean_a[i] += mean_cell[i][j] / static_cast<double>(b);
            mean_b[j] += mean_cell[i][j] / static_cast<double>(a);
            grand += mean_cell[i][j] / static_cast<double>(a * b);
        }

    AnovaResult r;
    r.factor_a.factor = name_a;
    r.factor_b.factor = name_b;
    r.interaction.factor = name_a + "x" + name_b;

    for (std::size_t i = 0; i < a; ++i)
        r.factor_a.ss += static_cast<double>(n * b) * (mean_a[i] - grand) * (mean_a[i] - grand);
    for (std::size_t j = 0; j < b; ++j)
        r.factor_b.ss += static_cast<double>(n * a) * (mean_b[j] - grand) * (mean_b[j] - grand);
    for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < b; ++j) {
            const double d = mean_cell[i][j] - mean_a[i] - mean_b[j] + grand;
            r.interaction.ss += static_cast<double>(n) * d * d;
            for (double y : cells[i][j])
                r.ss_error += (y - mean_cell[i][j]) * (y - mean_cell[i][j]);
        }

    r.factor_a.df = static_cast<int>(a) - 1;
    r.factor_b.df = static_cast<int>(b) - 1;
    r.interaction.df = r.factor_a.df * r.factor_b.df;
    r.df_error = static_cast<int>(a * b * (n - 1));

    const double ms_error = r.ss_error / r.df_error;
    auto finish = [&](AnovaEffect& e) {
        if (ms_error <= 0.0) {
            // All observations within each cell identical. If the effect SS is
            // also zero the data carry no variance at all.
            e.no_variance = e.ss <= 0.0;
            e.f = e.ss <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            e.p = e.ss <= 0.0 ? 1.0 : 0.0;
            return;
        }
        e.f = (e.ss / e.df) / ms_error;
        boost::math::fisher_f dist(e.df, r.df_error);
        e.p = boost::math::cdf(boost::math::complement(dist, e.f));
    };
    finish(r.factor_a);
    finish(r.factor_b);
    finish(r.interaction);
    return r;
}

struct PairwiseComparison {
    std::string group_a;
    std::string group_b;
    double t = 0.0;
    int df = 0;
    double p_raw = 1.0;
    double p_corrected = 1.0;  // Bonferroni over all pairs
    bool no_variance = false;
};

/// Paired t-tests between every pair of named groups (all groups must share
/// the same observation count and ordering, e.g. one value per subject),
/// Bonferroni-corrected over the number of pairs.
inline std::vector<PairwiseComparison> pairwise_compare(
    const std::vector<std::pair<std::string, std::vector<double>>>& groups) {
    if (groups.size() < 2) fail(ErrorKind::DegenerateDesign, "need >= 2 groups");
    const std::size_t n = groups.front().second.size();
    if (n < 2) fail(ErrorKind::DegenerateDesign, "need >= 2 paired observations");
    for (const auto& g : groups)
        if (g.second.size() != n)
            fail(ErrorKind::DegenerateDesign, "groups must be paired (equal sizes)");

    std::vector<PairwiseComparison> out;
    const std::size_t n_pairs = groups.size() * (groups.size() - 1) / 2;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            PairwiseComparison c;
            c.group_a = groups[i].first;
            c.group_b = groups[j].first;
            c.df = static_cast<int>(n) - 1;
            std::vector<double> diff(n);
            for (std::size_t k = 0; k < n; ++k) diff[k] = groups[i].second[k] - groups[j].second[k];
            const double md = mean(diff);
            const double sd = sample_std(diff);
            if (sd <= 0.0) {
                c.no_variance = true;
                c.t = 0.0;
                c.p_raw = md == 0.0 ? 1.0 : 0.0;
            } else {
                c.t = md / (sd / std::sqrt(static_cast<double>(n)));
                boost::math::students_t dist(c.df);
                c.p_raw = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(c.t)));
            }
            c.p_corrected = std::min(1.0, c.p_raw * static_cast<double>(n_pairs));
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace gaitforce
