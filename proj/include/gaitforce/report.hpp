#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gaitforce/evaluation.hpp"
#include "gaitforce/io_util.hpp"
#include "gaitforce/stats.hpp"

namespace gaitforce {

/// Median and percentile band of a set of cycles, resampled onto a common
/// percent-of-gait-cycle axis (bin b = b percent, 0..100).
struct EpochBand {
    std::vector<double> median;  // 101 bins
    std::vector<double> lo;      // 2.5th percentile
    std::vector<double> hi;      // 97.5th percentile
};

/// Linear resample of one cycle's valid region onto 101 %GC bins.
inline std::vector<double> resample_cycle_gc(const std::vector<double>& series,
                                             std::size_t valid_length, int bins = 101) {
    if (valid_length < 2) fail(ErrorKind::TooShort, "cycle needs >= 2 valid samples");
    std::vector<double> out(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b) {
        const double pos = static_cast<double>(b) / (bins - 1) *
                           static_cast<double>(valid_length - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        const std::size_t j = std::min(i + 1, valid_length - 1);
        const double frac = pos - static_cast<double>(i);
        out[static_cast<std::size_t>(b)] = series[i] * (1.0 - frac) + series[j] * frac;
    }
    return out;
}

inline EpochBand epoch_band(const std::vector<std::vector<double>>& resampled_cycles) {
    if (resampled_cycles.empty()) fail(ErrorKind::MissingInputs, "no cycles for the epoch band");
    const std::size_t bins = resampled_cycles.front().size();
    EpochBand band;
    band.median.resize(bins);
    band.lo.resize(bins);
    band.hi.resize(bins);
    std::vector<double> column(resampled_cycles.size());
    for (std::size_t b = 0; b < bins; ++b) {
        for (std::size_t c = 0; c < resampled_cycles.size(); ++c)
            column[c] = resampled_cycles[c][b];
        band.median[b] = percentile(column, 50.0);
        band.lo[b] = percentile(column, 2.5);
        band.hi[b] = percentile(column, 97.5);
    }
    return band;
}

namespace detail {

inline std::string svg_polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                                const std::string& attrs) {
    std::ostringstream os;
    os << "<polyline fill=\"none\" " << attrs << " points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
        os << strfmt("%.2f,%.2f ", xs[i], ys[i]);
    os << "\"/>\n";
    return os.str();
}

}  // namespace detail

/// Epoch plot: reference and estimate medians with shaded 2.5-97.5
/// percentile bands, one static SVG file.
inline void write_epoch_svg(const std::filesystem::path& path, const EpochBand& ref,
                            const EpochBand& est, const std::string& title) {
    const double w = 640, h = 420, ml = 56, mr = 16, mt = 36, mb = 44;
    double ymax = 0.1;
    for (const auto* band : {&ref, &est})
        for (const auto* v : {&band->hi, &band->median})
            for (double y : *v) ymax = std::max(ymax, y);
    ymax *= 1.08;

    const std::size_t bins = ref.median.size();
    auto px = [&](std::size_t b) {
        return ml + (w - ml - mr) * static_cast<double>(b) / static_cast<double>(bins - 1);
    };
    auto py = [&](double y) { return h - mb - (h - mt - mb) * (y / ymax); };

    std::ostringstream os;
    os << strfmt("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                 "viewBox=\"0 0 %.0f %.0f\">\n", w, h, w, h);
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << strfmt("<text x=\"%.0f\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\">%s"
                 "</text>\n", ml, title.c_str());

    auto band_path = [&](const EpochBand& band, const char* fill) {
        std::ostringstream p;
        p << "<path fill=\"" << fill << "\" fill-opacity=\"0.25\" stroke=\"none\" d=\"M";
        for (std::size_t b = 0; b < bins; ++b)
            p << strfmt("%.2f %.2f L", px(b), py(band.hi[b]));
        for (std::size_t b = bins; b-- > 0;)
            p << strfmt("%.2f %.2f ", px(b), py(band.lo[b])) << (b == 0 ? "Z" : "L");
        p << "\"/>\n";
        return p.str();
    };
    os << band_path(ref, "#555555") << band_path(est, "#d62728");

    std::vector<double> xs(bins), yr(bins), ye(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        xs[b] = px(b);
        yr[b] = py(ref.median[b]);
        ye[b] = py(est.median[b]);
    }
    os << detail::svg_polyline(xs, yr, "stroke=\"#222222\" stroke-width=\"1.8\"");
    os << detail::svg_polyline(xs, ye, "stroke=\"#d62728\" stroke-width=\"1.8\"");

    // axes and ticks
    os << strfmt("<line x1=\"%.0f\" y1=\"%.2f\" x2=\"%.0f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                 ml, h - mb, w - mr, h - mb);
    os << strfmt("<line x1=\"%.0f\" y1=\"%.2f\" x2=\"%.0f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                 ml, mt, ml, h - mb);
    for (int gc = 0; gc <= 100; gc += 25) {
        const double x = px(static_cast<std::size_t>(gc * (static_cast<int>(bins) - 1) / 100));
        os << strfmt("<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
                     "text-anchor=\"middle\">%d</text>\n", x, h - mb + 16.0, gc);
    }
    os << strfmt("<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" "
                 "text-anchor=\"middle\">gait cycle (%%)</text>\n", (ml + w - mr) / 2, h - 8.0);
    for (double frac : {0.0, 0.5, 1.0}) {
        const double yv = ymax * frac;
        os << strfmt("<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
                     "text-anchor=\"end\">%.2f</text>\n", ml - 6.0, py(yv) + 4.0, yv);
    }
    os << strfmt("<text x=\"14\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" "
                 "transform=\"rotate(-90 14 %.1f)\" text-anchor=\"middle\">vGRF (BW)</text>\n",
                 (mt + h - mb) / 2, (mt + h - mb) / 2);
    os << "<text x=\"" << w - mr - 150 << "\" y=\"30\" font-family=\"sans-serif\" "
       << "font-size=\"11\" fill=\"#222222\">reference</text>\n";
    os << "<text x=\"" << w - mr - 150 << "\" y=\"44\" font-family=\"sans-serif\" "
       << "font-size=\"11\" fill=\"#d62728\">estimated</text>\n";
    os << "</svg>\n";
    write_text_file(path, os.str());
}

inline std::string metrics_tsv_header() {
    return "scope\tsubject\tspeed\tmodel\tfeatures\trmse_bw\trmse_std\tnrmse_pct\tr\tr_std\t"
           "wap_err_bw\tpop_err_bw\twap_delay_gc\tpop_delay_gc\tref_range_bw\tn_cycles";
}

inline std::string metric_row_tsv(const MetricRow& r) {
    return strfmt("%s\t%s\t%s\t%s\t%s\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t"
                  "%.6f\t%zu",
                  r.scope.c_str(), r.subject.c_str(), r.speed.c_str(), r.model.c_str(),
                  r.features.c_str(), r.rmse, r.rmse_std, r.nrmse, r.r, r.r_std, r.wap_err,
                  r.pop_err, r.wap_delay, r.pop_delay, r.ref_range, r.n_cycles);
}

inline void write_metrics_tsv(const std::filesystem::path& path,
                              const std::vector<ExperimentResult>& experiments) {
    std::ostringstream os;
    os << metrics_tsv_header() << "\n";
    for (const auto& ex : experiments) {
        for (const auto& r : ex.cell_rows) os << metric_row_tsv(r) << "\n";
        for (const auto& r : ex.speed_rows) os << metric_row_tsv(r) << "\n";
        os << metric_row_tsv(ex.global_row) << "\n";
    }
    write_text_file(path, os.str());
}

/// Nested key-value summary mirroring the per-speed/global table layout.
inline void write_summary_txt(const std::filesystem::path& path,
                              const std::vector<ExperimentResult>& experiments,
                              const StatsReport* stats = nullptr) {
    std::ostringstream os;
    for (const auto& ex : experiments) {
        os << "experiment model=" << to_string(ex.model) << " features=" << to_string(ex.features)
           << " protocol=" << to_string(ex.protocol) << "\n";
        auto line = [&](const MetricRow& r, const std::string& label) {
            os << "  " << label << "\n";
            os << strfmt("    rmse_bw %.6f\n    rmse_std %.6f\n    nrmse_pct %.6f\n    r %.6f\n",
                         r.rmse, r.rmse_std, r.nrmse, r.r);
            os << strfmt("    wap_err_bw %.6f\n    pop_err_bw %.6f\n", r.wap_err, r.pop_err);
            os << strfmt("    wap_delay_gc %.6f\n    pop_delay_gc %.6f\n", r.wap_delay,
                         r.pop_delay);
            os << strfmt("    n_cycles %zu\n", r.n_cycles);
        };
        line(ex.global_row, "global");
        for (const auto& r : ex.speed_rows) line(r, "speed " + r.speed);
    }
    if (stats) {
        os << "anova\n";
        auto eff = [&](const AnovaEffect& e) {
            os << strfmt("  %s F(%d) %.6f p %.9f%s\n", e.factor.c_str(), e.df, e.f, e.p,
                         e.no_variance ? " no_variance" : "");
        };
        eff(stats->anova.factor_a);
        eff(stats->anova.factor_b);
        eff(stats->anova.interaction);
        os << "pairwise\n";
        for (const auto& c : stats->pairwise)
            os << strfmt("  %s vs %s t %.6f df %d p_raw %.9f p_corrected %.9f%s\n",
                         c.group_a.c_str(), c.group_b.c_str(), c.t, c.df, c.p_raw, c.p_corrected,
                         c.no_variance ? " no_variance" : "");
    }
    write_text_file(path, os.str());
}

inline void write_traces_tsv(const std::filesystem::path& path,
                             const std::vector<CycleTrace>& traces) {
    std::ostringstream os;
    os << "subject\tspeed\tfoot\tcycle\tsample\tref_bw\test_bw\n";
    for (const auto& t : traces)
        for (std::size_t i = 0; i < t.valid_length; ++i)
            os << strfmt("%s\t%.1f\t%s\t%d\t%zu\t%.6f\t%.6f", t.subject.c_str(), t.speed,
                         to_string(t.foot), t.cycle_index, i, t.ref[i], t.est[i])
               << "\n";
    write_text_file(path, os.str());
}

inline std::vector<CycleTrace> read_traces_tsv(const std::filesystem::path& path) {
    std::istringstream is(read_text_file(path));
    std::string line;
    if (!std::getline(is, line)) fail(ErrorKind::CorruptFile, path.string() + ": empty");
    if (line != "subject\tspeed\tfoot\tcycle\tsample\tref_bw\test_bw")
        fail(ErrorKind::CorruptFile, path.string() + ": unknown column header row");
    std::vector<CycleTrace> traces;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto toks = split_ws(line);
        if (toks.size() != 7) fail(ErrorKind::CorruptFile, path.string() + ": bad trace row");
        const int cycle = static_cast<int>(parse_double(toks[3], "cycle"));
        const double speed = parse_double(toks[1], "speed");
        const FootSide foot = foot_from_string(toks[2]);
        if (traces.empty() || traces.back().subject != toks[0] ||
            traces.back().cycle_index != cycle || traces.back().speed != speed ||
            traces.back().foot != foot) {
            CycleTrace t;
            t.subject = toks[0];
            t.speed = speed;
            t.foot = foot;
            t.cycle_index = cycle;
            traces.push_back(std::move(t));
        }
        traces.back().ref.push_back(parse_double(toks[5], "ref"));
        traces.back().est.push_back(parse_double(toks[6], "est"));
        traces.back().valid_length = traces.back().ref.size();
    }
    return traces;
}

}  // namespace gaitforce
