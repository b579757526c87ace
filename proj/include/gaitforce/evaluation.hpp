#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gaitforce/forest.hpp"
#include "gaitforce/lstm.hpp"
#include "gaitforce/metrics.hpp"
#include "gaitforce/mlp.hpp"
#include "gaitforce/model_io.hpp"
#include "gaitforce/postsignal.hpp"
#include "gaitforce/preprocess.hpp"
#include "gaitforce/stats.hpp"
#include "gaitforce/window_io.hpp"

namespace gaitforce {

enum class Protocol { IntraParticipant, InterParticipant };

inline const char* to_string(Protocol p) {
    return p == Protocol::IntraParticipant ? "intra" : "inter";
}

inline Protocol protocol_from_string(const std::string& s) {
    if (s == "intra") return Protocol::IntraParticipant;
    if (s == "inter") return Protocol::InterParticipant;
    fail(ErrorKind::ConfigError, "unknown protocol '" + s + "'");
}

struct SplitFold {
    std::string fold_id;  // the (test) subject
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

struct SplitPlan {
    Protocol protocol = Protocol::IntraParticipant;
    std::uint64_t seed = 0;
    double train_fraction = 0.7;
    std::vector<SplitFold> folds;
};

inline std::string speed_label(double speed) { return strfmt("%.1f", speed); }

/// Split the windows by whole gait cycles. Intra: one fold per subject with
/// ~70% of each (subject, speed) group's cycles in train (count rounded up),
/// rest in test. Inter: leave-one-subject-out, one fold per subject.
inline SplitPlan make_split(const WindowSet& set, Protocol protocol, std::uint64_t seed,
                            double train_fraction = 0.7) {
    std::map<std::string, std::vector<std::size_t>> by_subject;
    for (std::size_t i = 0; i < set.windows.size(); ++i)
        by_subject[set.windows[i].subject_id].push_back(i);
    if (by_subject.empty()) fail(ErrorKind::EmptyData, "no windows to split");

    SplitPlan plan;
    plan.protocol = protocol;
    plan.seed = seed;
    plan.train_fraction = train_fraction;

    if (protocol == Protocol::InterParticipant) {
        if (by_subject.size() < 2)
            fail(ErrorKind::TooFewSubjects,
                 strfmt("leave-one-subject-out needs >= 2 subjects, got %zu", by_subject.size()));
        for (const auto& [subject, test_idx] : by_subject) {
            SplitFold fold;
            fold.fold_id = subject;
            fold.test = test_idx;
            for (const auto& [other, idx] : by_subject)
                if (other != subject) fold.train.insert(fold.train.end(), idx.begin(), idx.end());
            std::sort(fold.train.begin(), fold.train.end());
            plan.folds.push_back(std::move(fold));
        }
        return plan;
    }

    for (const auto& [subject, idx] : by_subject) {
        SplitFold fold;
        fold.fold_id = subject;
        std::map<std::string, std::vector<std::size_t>> by_speed;
        for (std::size_t i : idx) by_speed[speed_label(set.windows[i].speed_mps)].push_back(i);
        for (auto& [spd, group] : by_speed) {
            std::mt19937_64 rng(derive_seed(seed, subject + "|" + spd));
            std::shuffle(group.begin(), group.end(), rng);
            const std::size_t n_train = static_cast<std::size_t>(
                std::ceil(train_fraction * static_cast<double>(group.size())));
            for (std::size_t k = 0; k < group.size(); ++k)
                (k < n_train ? fold.train : fold.test).push_back(group[k]);
        }
        std::sort(fold.train.begin(), fold.train.end());
        std::sort(fold.test.begin(), fold.test.end());
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

/// Asserts the realized plan, not the config: train/test disjoint, inter
/// folds free of their test subject, intra folds split 70/30 by cycle within
/// one cycle per (subject, speed) group.
inline void check_split(const SplitPlan& plan, const WindowSet& set) {
    for (const auto& fold : plan.folds) {
        std::set<std::size_t> train(fold.train.begin(), fold.train.end());
        for (std::size_t i : fold.test)
            if (train.count(i))
                fail(ErrorKind::DegenerateDesign,
                     "window appears in both train and test of fold " + fold.fold_id);
        if (plan.protocol == Protocol::InterParticipant) {
            for (std::size_t i : fold.train)
                if (set.windows[i].subject_id == fold.fold_id)
                    fail(ErrorKind::DegenerateDesign,
                         "test subject leaked into training rows of fold " + fold.fold_id);
        } else {
            std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
            for (std::size_t i : fold.train)
                counts[speed_label(set.windows[i].speed_mps)].first++;
            for (std::size_t i : fold.test)
                counts[speed_label(set.windows[i].speed_mps)].second++;
            for (const auto& [spd, c] : counts) {
                const double n = static_cast<double>(c.first + c.second);
                const double want = std::ceil(plan.train_fraction * n);
                if (std::abs(static_cast<double>(c.first) - want) > 1.0)
                    fail(ErrorKind::DegenerateDesign,
                         strfmt("fold %s speed %s train count %zu violates the split rule",
                                fold.fold_id.c_str(), spd.c_str(), c.first));
            }
        }
    }
}

struct EvalConfig {
    TrainConfig train;
    ForestConfig forest;
    double train_fraction = 0.7;
    unsigned jobs = 1;
    bool keep_traces = false;
    bool oracle = false;  // bypass the model and echo the reference (upper bound)
    std::optional<double> constant_predictor;  // diagnostic: fixed-value estimate
    double stance_threshold_bw = 0.05;
    int lstm_eval_batch = 16;
};

struct MetricRow {
    std::string scope;  // "cell" | "speed" | "global"
    std::string subject;
    std::string speed;  // label, "all" for global
    std::string model;
    std::string features;
    double rmse = 0.0, rmse_std = 0.0;
    double nrmse = 0.0;  // percent of reference range
    double r = 0.0, r_std = 0.0;
    double wap_err = 0.0, pop_err = 0.0;      // BW, mean absolute
    double wap_delay = 0.0, pop_delay = 0.0;  // %GC, mean absolute
    double ref_range = 0.0;                   // pooled reference range, BW
    std::size_t n_cycles = 0;
};

struct CycleTrace {
    std::string subject;
    double speed = 0.0;
    FootSide foot = FootSide::Left;
    int cycle_index = 0;
    std::size_t valid_length = 0;
    std::vector<double> ref, est;
};

struct ExperimentResult {
    ModelKind model = ModelKind::Lstm;
    FeatureSet features = FeatureSet::T3;
    Protocol protocol = Protocol::IntraParticipant;
    SplitPlan plan;
    std::vector<MetricRow> cell_rows;   // per (subject, speed)
    std::vector<MetricRow> speed_rows;  // per speed, across subjects
    MetricRow global_row;
    std::vector<CycleTrace> traces;
};

namespace detail {

struct CycleEval {
    std::string subject;
    double speed = 0.0;
    double rmse = 0.0;
    double r = 0.0;
    bool has_r = false;
    bool has_peaks = false;
    PeakErrors perr;
    double ref_min = 0.0, ref_max = 0.0;
};

inline WindowSet slice_feature_set(const WindowSet& set, FeatureSet features) {
    WindowSet out;
    out.manifest = ChannelManifest::standard(features);
    out.normalized = set.normalized;
    const auto idx = channel_slice(out.manifest, set.manifest);
    out.windows.reserve(set.windows.size());
    for (const auto& w : set.windows) {
        GaitCycleWindow s = w;
        s.x.clear();
        s.x.reserve(idx.size());
        for (std::size_t c : idx) s.x.push_back(w.x[c]);
        out.windows.push_back(std::move(s));
    }
    return out;
}

/// Trains one fold's model and evaluates its test windows cycle by cycle.
/// Metrics are computed over the valid (unpadded) region of each window.
inline std::pair<std::vector<CycleEval>, std::vector<CycleTrace>> run_fold(
    const WindowSet& sliced, const SplitFold& fold, ModelKind kind, const EvalConfig& cfg,
    std::uint64_t fold_seed) {
    MinMaxScaler scaler = fit_minmax(sliced, fold.train);

    std::optional<MlpModel> mlp;
    std::optional<ForestModel> forest;
    std::optional<BiLstmModel> lstm;
    const int C = static_cast<int>(sliced.manifest.channel_count());
    const bool skip_training = cfg.oracle || cfg.constant_predictor.has_value();

    if (!skip_training) {
        if (kind == ModelKind::Lstm) {
            std::vector<SeqSample> train_data;
            train_data.reserve(fold.train.size());
            for (std::size_t i : fold.train) {
                const auto w = apply_minmax(sliced.windows[i], scaler);
                train_data.push_back({w.x, w.y});
            }
            TrainConfig tc = cfg.train;
            tc.seed = fold_seed;
            lstm = lstm_train(train_data, tc, BiLstmModel::standard(C, derive_seed(fold_seed, "init")));
        } else if (kind == ModelKind::Mlp) {
            const std::size_t n = fold.train.size() * kWindowSamples;
            Eigen::MatrixXd x(C, n);
            Eigen::RowVectorXd y(n);
            std::size_t col = 0;
            for (std::size_t i : fold.train) {
                const auto w = apply_minmax(sliced.windows[i], scaler);
                for (int t = 0; t < kWindowSamples; ++t, ++col) {
                    for (int c = 0; c < C; ++c) x(c, col) = w.x[c][t];
                    y(col) = w.y[t];
                }
            }
            TrainConfig tc = cfg.train;
            tc.seed = fold_seed;
            mlp = mlp_train(x, y, tc);
        } else {
            std::vector<std::vector<double>> x;
            std::vector<double> y;
            x.reserve(fold.train.size() * kWindowSamples);
            for (std::size_t i : fold.train) {
                const auto w = apply_minmax(sliced.windows[i], scaler);
                for (int t = 0; t < kWindowSamples; ++t) {
                    std::vector<double> row(C);
                    for (int c = 0; c < C; ++c) row[c] = w.x[c][t];
                    x.push_back(std::move(row));
                    y.push_back(w.y[t]);
                }
            }
            ForestConfig fc = cfg.forest;
            fc.seed = fold_seed;
            fc.jobs = 1;  // folds already run in parallel
            forest = forest_train(x, y, fc);
        }
    }

    std::vector<CycleEval> evals;
    std::vector<CycleTrace> traces;

    // Batched LSTM inference; pointwise models predict sample by sample.
    std::vector<GaitCycleWindow> test_norm;
    test_norm.reserve(fold.test.size());
    for (std::size_t i : fold.test) test_norm.push_back(apply_minmax(sliced.windows[i], scaler));

    std::vector<std::vector<double>> estimates(fold.test.size());
    if (cfg.oracle) {
        for (std::size_t k = 0; k < fold.test.size(); ++k) estimates[k] = test_norm[k].y;
    } else if (cfg.constant_predictor) {
        for (auto& e : estimates) e.assign(kWindowSamples, *cfg.constant_predictor);
    } else if (kind == ModelKind::Lstm) {
        std::vector<SeqSample> seqs(fold.test.size());
        for (std::size_t k = 0; k < fold.test.size(); ++k)
            seqs[k] = {test_norm[k].x, test_norm[k].y};
        for (std::size_t start = 0; start < seqs.size();
             start += static_cast<std::size_t>(cfg.lstm_eval_batch)) {
            const std::size_t stop =
                std::min(seqs.size(), start + static_cast<std::size_t>(cfg.lstm_eval_batch));
            std::vector<const SeqSample*> batch;
            for (std::size_t k = start; k < stop; ++k) batch.push_back(&seqs[k]);
            auto preds = lstm_forward_batch(*lstm, batch);
            for (std::size_t k = start; k < stop; ++k) estimates[k] = std::move(preds[k - start]);
        }
    } else {
        for (std::size_t k = 0; k < fold.test.size(); ++k) {
            const auto& w = test_norm[k];
            estimates[k].resize(kWindowSamples);
            std::vector<double> step(C);
            for (int t = 0; t < kWindowSamples; ++t) {
                for (int c = 0; c < C; ++c) step[c] = w.x[c][t];
                estimates[k][t] =
                    kind == ModelKind::Mlp ? mlp_forward(*mlp, step) : forest_predict(*forest, step);
            }
        }
    }

    for (std::size_t k = 0; k < fold.test.size(); ++k) {
        const auto& w = sliced.windows[fold.test[k]];
        std::vector<double> est = cfg.oracle ? estimates[k]
                                             : postprocess_estimate(kind, estimates[k]);
        const std::vector<double> ref_valid(w.y.begin(), w.y.begin() + w.valid_length);
        const std::vector<double> est_valid(est.begin(), est.begin() + w.valid_length);

        CycleEval e;
        e.subject = w.subject_id;
        e.speed = w.speed_mps;
        e.rmse = rmse(ref_valid, est_valid);
        e.ref_min = *std::min_element(ref_valid.begin(), ref_valid.end());
        e.ref_max = *std::max_element(ref_valid.begin(), ref_valid.end());
        try {
            e.r = pearson_r(ref_valid, est_valid);
            e.has_r = true;
        } catch (const Error&) {
            e.has_r = false;  // constant series; excluded from the R average
        }
        try {
            const auto ref_st = detect_stance(ref_valid, cfg.stance_threshold_bw);
            const auto est_st = detect_stance(est_valid, cfg.stance_threshold_bw);
            const auto ref_pk = extract_peaks(ref_valid, ref_st, w.valid_length);
            const auto est_pk = extract_peaks(est_valid, est_st, w.valid_length);
            e.perr = peak_errors(ref_pk, est_pk);
            e.has_peaks = true;
        } catch (const Error&) {
            e.has_peaks = false;  // window skipped in peak statistics
        }
        evals.push_back(std::move(e));

        if (cfg.keep_traces) {
            CycleTrace trace;
            trace.subject = w.subject_id;
            trace.speed = w.speed_mps;
            trace.foot = w.foot;
            trace.cycle_index = w.cycle_index;
            trace.valid_length = w.valid_length;
            trace.ref = w.y;
            trace.est = std::move(est);
            traces.push_back(std::move(trace));
        }
    }
    return {std::move(evals), std::move(traces)};
}

inline MetricRow aggregate_cycles(const std::vector<CycleEval>& evals, const std::string& scope,
                                  const std::string& subject, const std::string& speed) {
    MetricRow row;
    row.scope = scope;
    row.subject = subject;
    row.speed = speed;
    row.n_cycles = evals.size();
    std::vector<double> rmses, rs, wap, pop, wdel, pdel;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& e : evals) {
        rmses.push_back(e.rmse);
        if (e.has_r) rs.push_back(e.r);
        if (e.has_peaks) {
            wap.push_back(e.perr.wap_err_bw);
            pop.push_back(e.perr.pop_err_bw);
            wdel.push_back(std::abs(e.perr.wap_delay_gc));
            pdel.push_back(std::abs(e.perr.pop_delay_gc));
        }
        lo = std::min(lo, e.ref_min);
        hi = std::max(hi, e.ref_max);
    }
    row.rmse = mean(rmses);
    row.rmse_std = sample_std(rmses);
    if (!rs.empty()) {
        row.r = mean(rs);
        row.r_std = sample_std(rs);
    }
    if (!wap.empty()) {
        row.wap_err = mean(wap);
        row.pop_err = mean(pop);
        row.wap_delay = mean(wdel);
        row.pop_delay = mean(pdel);
    }
    row.ref_range = hi - lo;
    row.nrmse = row.ref_range > 0.0 ? 100.0 * row.rmse / row.ref_range : 0.0;
    return row;
}

/// Aggregates sub-rows into a speed or global row: metric means (with sample
/// std over sub-rows) and the pooled reference range for NRMSE.
inline MetricRow aggregate_rows(const std::vector<MetricRow>& rows, const std::string& scope,
                                const std::string& speed) {
    MetricRow out;
    out.scope = scope;
    out.subject = "all";
    out.speed = speed;
    std::vector<double> rmses, rs;
    for (const auto& r : rows) {
        rmses.push_back(r.rmse);
        rs.push_back(r.r);
        out.wap_err += r.wap_err;
        out.pop_err += r.pop_err;
        out.wap_delay += r.wap_delay;
        out.pop_delay += r.pop_delay;
        out.n_cycles += r.n_cycles;
    }
    // Every cycle's valid region includes swing samples at 0 BW, so each
    // sub-range is anchored at 0 and the pooled range is the max sub-range.
    double range = 0.0;
    for (const auto& r : rows) range = std::max(range, r.ref_range);
    const double n = static_cast<double>(rows.size());
    out.rmse = mean(rmses);
    out.rmse_std = sample_std(rmses);
    out.r = mean(rs);
    out.r_std = sample_std(rs);
    out.wap_err /= n;
    out.pop_err /= n;
    out.wap_delay /= n;
    out.pop_delay /= n;
    out.ref_range = range;
    out.nrmse = range > 0.0 ? 100.0 * out.rmse / range : 0.0;
    return out;
}

}  // namespace detail

/// Trains and evaluates one (model, feature set, protocol) experiment.
/// Folds run in parallel with per-fold derived seeds and are assembled in
/// fold order, so the result does not depend on the job count.
inline ExperimentResult run_experiment(const WindowSet& raw_set, ModelKind kind,
                                       FeatureSet features, Protocol protocol,
                                       const EvalConfig& cfg) {
    if (raw_set.normalized)
        fail(ErrorKind::ConfigError, "run_experiment expects raw (unnormalized) windows");
    ExperimentResult result;
    result.model = kind;
    result.features = features;
    result.protocol = protocol;

    const WindowSet sliced = detail::slice_feature_set(raw_set, features);
    result.plan = make_split(sliced, protocol, cfg.train.seed, cfg.train_fraction);
    check_split(result.plan, sliced);

    std::vector<std::vector<detail::CycleEval>> fold_evals(result.plan.folds.size());
    std::vector<std::vector<CycleTrace>> fold_traces(result.plan.folds.size());
    parallel_for(result.plan.folds.size(), cfg.jobs, [&](std::size_t f) {
        const auto& fold = result.plan.folds[f];
        auto [evals, traces] = detail::run_fold(sliced, fold, kind, cfg,
                                                derive_seed(cfg.train.seed, fold.fold_id));
        fold_evals[f] = std::move(evals);
        fold_traces[f] = std::move(traces);
    });

    std::map<std::pair<std::string, std::string>, std::vector<detail::CycleEval>> cells;
    for (std::size_t f = 0; f < fold_evals.size(); ++f) {
        for (auto& e : fold_evals[f]) cells[{e.subject, speed_label(e.speed)}].push_back(e);
        for (auto& t : fold_traces[f]) result.traces.push_back(std::move(t));
    }

    std::map<std::string, std::vector<MetricRow>> by_speed;
    for (const auto& [key, evals] : cells) {
        MetricRow row = detail::aggregate_cycles(evals, "cell", key.first, key.second);
        row.model = to_string(kind);
        row.features = to_string(features);
        by_speed[key.second].push_back(row);
        result.cell_rows.push_back(std::move(row));
    }
    for (const auto& [spd, rows] : by_speed) {
        MetricRow row = detail::aggregate_rows(rows, "speed", spd);
        row.model = to_string(kind);
        row.features = to_string(features);
        result.speed_rows.push_back(std::move(row));
    }
    result.global_row = detail::aggregate_rows(result.cell_rows, "global", "all");
    result.global_row.model = to_string(kind);
    result.global_row.features = to_string(features);
    return result;
}

/// Two-way ANOVA over per-subject global RMSE keyed by algorithm x feature
/// set, plus Bonferroni-corrected paired comparisons between algorithms.
struct StatsReport {
    AnovaResult anova;
    std::vector<PairwiseComparison> pairwise;
};

inline StatsReport build_stats(const std::vector<ExperimentResult>& experiments) {
    std::set<std::string> models, features, subjects;
    for (const auto& ex : experiments) {
        models.insert(to_string(ex.model));
        features.insert(to_string(ex.features));
        for (const auto& row : ex.cell_rows) subjects.insert(row.subject);
    }
    if (models.size() < 2 || features.size() < 2)
        fail(ErrorKind::DegenerateDesign, "ANOVA needs >= 2 algorithms and >= 2 feature sets");

    // observation = one subject's mean RMSE across speeds, per experiment
    auto subject_rmse = [&](const ExperimentResult& ex) {
        std::map<std::string, std::vector<double>> per_subject;
        for (const auto& row : ex.cell_rows) per_subject[row.subject].push_back(row.rmse);
        std::map<std::string, double> out;
        for (const auto& [s, v] : per_subject) out[s] = mean(v);
        return out;
    };

    std::vector<std::vector<std::vector<double>>> cells(
        models.size(), std::vector<std::vector<double>>(features.size()));
    std::map<std::string, std::map<std::string, std::vector<double>>> algo_obs;  // model -> feature obs
    for (const auto& ex : experiments) {
        const auto mi = static_cast<std::size_t>(
            std::distance(models.begin(), models.find(to_string(ex.model))));
        const auto fi = static_cast<std::size_t>(
            std::distance(features.begin(), features.find(to_string(ex.features))));
        const auto obs = subject_rmse(ex);
        for (const auto& s : subjects) {
            const auto it = obs.find(s);
            if (it == obs.end())
                fail(ErrorKind::DegenerateDesign, "subject " + s + " missing from an experiment");
            cells[mi][fi].push_back(it->second);
            algo_obs[to_string(ex.model)][std::string(to_string(ex.features)) + "|" + s]
                .push_back(it->second);
        }
    }

    StatsReport report;
    report.anova = anova_two_way(cells, "algorithm", "features");
    std::vector<std::pair<std::string, std::vector<double>>> groups;
    for (const auto& [model, keyed] : algo_obs) {
        std::vector<double> obs;
        for (const auto& [key, v] : keyed) obs.insert(obs.end(), v.begin(), v.end());
        groups.push_back({model, obs});
    }
    report.pairwise = pairwise_compare(groups);
    return report;
}

}  // namespace gaitforce
