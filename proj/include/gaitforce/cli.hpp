#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gaitforce/config.hpp"
#include "gaitforce/evaluation.hpp"
#include "gaitforce/report.hpp"
#include "gaitforce/synthgait.hpp"
#include "gaitforce/trial_io.hpp"
#include "gaitforce/validate.hpp"

namespace gaitforce {

// Exit codes, stable across releases:
//   0 success, no findings
//   1 usage or configuration error
//   2 completed with findings (validation findings / logged exclusions)
//   3 I/O, file format, or data error
//   4 internal error
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFindings = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitInternal = 4;

namespace detail {

inline void ensure_output_dir(const std::filesystem::path& dir, bool force) {
    namespace fs = std::filesystem;
    if (fs::exists(dir) && !fs::is_empty(dir) && !force)
        fail(ErrorKind::IoError,
             "output directory " + dir.string() + " is not empty (use --force to overwrite)");
    fs::create_directories(dir);
}

inline std::string trial_dir_name(const TrialRecord& t) {
    return t.subject_id + "_" + speed_label(t.speed_mps);
}

}  // namespace detail

/// simulate: synthetic dataset -> one directory per trial plus ground-truth
/// sidecars and a manifest of produced files.
inline int cmd_simulate(const RunConfig& cfg) {
    const auto out = cfg.out_dir("simulate");
    detail::ensure_output_dir(out, cfg.flag("force"));

    const int subjects = static_cast<int>(cfg.integer("simulate.subjects"));
    SynthOptions opt;
    opt.duration_s = cfg.num("simulate.duration_s");
    const auto layout = SensorArrayLayout::insole96();
    const auto ds = generate_dataset(subjects, layout, cfg.seed(), opt, cfg.jobs());

    std::ostringstream manifest;
    manifest << "seed " << cfg.seed() << "\n";
    for (std::size_t i = 0; i < ds.trials.size(); ++i) {
        const auto dir = out / "trials" / detail::trial_dir_name(ds.trials[i]);
        write_trial(dir, ds.trials[i]);
        write_ground_truth(dir / "ground_truth.txt", ds.truths[i]);
        for (const char* f : {"meta.txt", "pressure_left.tsv", "pressure_right.tsv",
                              "imu_left.tsv", "imu_right.tsv", "vgrf_left.tsv", "vgrf_right.tsv",
                              "ground_truth.txt"})
            manifest << (std::filesystem::path("trials") / detail::trial_dir_name(ds.trials[i]) /
                         f).generic_string()
                     << "\n";
    }
    write_layout_file(out / "layout.tsv", layout);
    manifest << "layout.tsv\n";
    write_text_file(out / "manifest.txt", manifest.str());
    cfg.echo_into(out);
    return kExitOk;
}

/// preprocess: trial directories -> one raw window container plus an
/// exclusion log. Returns the findings exit code when anything was logged.
inline int cmd_preprocess(const RunConfig& cfg) {
    const auto out = cfg.out_dir("preprocess");
    detail::ensure_output_dir(out, cfg.flag("force"));
    const std::filesystem::path input = cfg.str("preprocess.input");
    if (input.empty()) fail(ErrorKind::ConfigError, "preprocess.input is required");

    const auto trials_dir = input / "trials";
    if (!std::filesystem::is_directory(trials_dir))
        fail(ErrorKind::IoError, "no trials/ directory under " + input.string());
    const auto layout = std::filesystem::exists(input / "layout.tsv")
                            ? read_layout_file(input / "layout.tsv")
                            : SensorArrayLayout::insole96();

    std::vector<std::filesystem::path> dirs;
    for (const auto& e : std::filesystem::directory_iterator(trials_dir))
        if (e.is_directory()) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) fail(ErrorKind::MissingInputs, "no trial directories found");

    PreprocessOptions opt;
    opt.contact_threshold_bw = cfg.num("preprocess.contact_threshold_bw");
    opt.debounce_s = cfg.num("preprocess.debounce_ms") / 1000.0;
    opt.settle_s = cfg.num("preprocess.settle_s");
    opt.max_cycles_per_foot = static_cast<std::size_t>(cfg.integer("preprocess.max_cycles_per_foot"));

    std::vector<std::vector<GaitCycleWindow>> windows_per_trial(dirs.size());
    std::vector<std::vector<Finding>> findings_per_trial(dirs.size());
    parallel_for(dirs.size(), cfg.jobs(), [&](std::size_t i) {
        const TrialRecord trial = read_trial(dirs[i], layout.sensor_count());
        auto& findings = findings_per_trial[i];
        for (auto& f : validate_trial(trial, layout)) {
            f.message = dirs[i].filename().string() + ": " + f.message;
            findings.push_back(std::move(f));
        }
        const auto pt = build_processed_trial(trial, layout, opt);
        std::vector<Finding> exclusions;
        windows_per_trial[i] = segment_cycles(pt, opt, &exclusions);
        for (auto& f : exclusions) {
            f.message = dirs[i].filename().string() + ": " + f.message;
            findings.push_back(std::move(f));
        }
    });

    WindowSet set;
    set.manifest = ChannelManifest::standard(FeatureSet::T3);
    set.normalized = false;
    std::vector<Finding> findings;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        for (auto& w : windows_per_trial[i]) set.windows.push_back(std::move(w));
        for (auto& f : findings_per_trial[i]) findings.push_back(std::move(f));
    }
    save_windows(out / "windows.gfw", set);

    std::ostringstream log;
    for (const auto& f : findings) log << f.code << "\t" << f.message << "\n";
    write_text_file(out / "exclusions.log", log.str());
    cfg.echo_into(out);
    return findings.empty() ? kExitOk : kExitFindings;
}

namespace detail {

inline TrainConfig train_config_from(const RunConfig& cfg) {
    TrainConfig tc;
    tc.epochs = static_cast<int>(cfg.integer("train.epochs"));
    tc.batch_size = static_cast<int>(cfg.integer("train.batch"));
    tc.learning_rate = cfg.num("train.lr");
    tc.dropout = cfg.num("train.dropout");
    tc.patience = static_cast<int>(cfg.integer("train.patience"));
    const std::string opt = cfg.str("train.optimizer");
    if (opt == "adam")
        tc.optimizer = Optimizer::Adam;
    else if (opt == "sgd")
        tc.optimizer = Optimizer::Sgd;
    else
        fail(ErrorKind::ConfigError, "train.optimizer must be adam or sgd");
    tc.seed = cfg.seed();
    return tc;
}

inline ForestConfig forest_config_from(const RunConfig& cfg) {
    ForestConfig fc;
    fc.n_trees = static_cast<int>(cfg.integer("train.forest_trees"));
    fc.min_samples_leaf = static_cast<int>(cfg.integer("train.forest_min_leaf"));
    fc.bootstrap = cfg.flag("train.forest_bootstrap");
    const std::string agg = cfg.str("train.forest_aggregate");
    if (agg == "mean")
        fc.aggregate = ForestAggregate::Mean;
    else if (agg == "median")
        fc.aggregate = ForestAggregate::Median;
    else
        fail(ErrorKind::ConfigError, "train.forest_aggregate must be mean or median");
    fc.seed = cfg.seed();
    return fc;
}

inline std::vector<std::size_t> feature_slice_or_fail(const ChannelManifest& want,
                                                      const ChannelManifest& have) {
    try {
        return channel_slice(want, have);
    } catch (const Error&) {
        fail(ErrorKind::ShapeMismatch,
             "requested feature channels are missing from the window container.\n"
             "requested manifest:\n" + want.serialize() + "container manifest:\n" +
                 have.serialize());
    }
}

}  // namespace detail

/// train: one model fitted on every window in the container (the experiment
/// protocols live in `evaluate`). The fitted min-max scaler travels inside
/// the model file.
inline int cmd_train(const RunConfig& cfg) {
    const auto out = cfg.out_dir("train");
    detail::ensure_output_dir(out, cfg.flag("force"));
    const std::filesystem::path input = cfg.str("train.input");
    if (input.empty()) fail(ErrorKind::ConfigError, "train.input is required");

    const WindowSet raw = load_windows(std::filesystem::is_directory(input)
                                           ? input / "windows.gfw"
                                           : input);
    const ModelKind kind = model_kind_from_string(cfg.str("train.model"));
    const FeatureSet features = feature_set_from_string(cfg.str("train.features"));
    const ChannelManifest manifest = ChannelManifest::standard(features);
    detail::feature_slice_or_fail(manifest, raw.manifest);

    const WindowSet sliced = gaitforce::detail::slice_feature_set(raw, features);
    std::vector<std::size_t> all(sliced.windows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const MinMaxScaler scaler = fit_minmax(sliced, all);

    SavedModel sm;
    sm.kind = kind;
    sm.manifest = manifest;
    sm.scaler = scaler;
    const TrainConfig tc = detail::train_config_from(cfg);
    const int C = static_cast<int>(manifest.channel_count());

    std::ostringstream hp;
    hp << "seed=" << cfg.seed() << "\n";
    if (kind == ModelKind::Lstm) {
        std::vector<SeqSample> data;
        for (std::size_t i : all) {
            const auto w = apply_minmax(sliced.windows[i], scaler);
            data.push_back({w.x, w.y});
        }
        hp << "epochs=" << tc.epochs << "\nbatch=" << tc.batch_size << "\nlr=" << tc.learning_rate
           << "\ndropout=" << tc.dropout << "\n";
        sm.model = lstm_train(data, tc, BiLstmModel::standard(C, derive_seed(tc.seed, "init")));
    } else if (kind == ModelKind::Mlp) {
        Eigen::MatrixXd x(C, all.size() * kWindowSamples);
        Eigen::RowVectorXd y(all.size() * kWindowSamples);
        std::size_t col = 0;
        for (std::size_t i : all) {
            const auto w = apply_minmax(sliced.windows[i], scaler);
            for (int t = 0; t < kWindowSamples; ++t, ++col) {
                for (int c = 0; c < C; ++c) x(c, col) = w.x[c][t];
                y(col) = w.y[t];
            }
        }
        hp << "epochs=" << tc.epochs << "\nbatch=" << tc.batch_size << "\nlr=" << tc.learning_rate
           << "\n";
        sm.model = mlp_train(x, y, tc);
    } else {
        std::vector<std::vector<double>> x;
        std::vector<double> y;
        for (std::size_t i : all) {
            const auto w = apply_minmax(sliced.windows[i], scaler);
            for (int t = 0; t < kWindowSamples; ++t) {
                std::vector<double> row(C);
                for (int c = 0; c < C; ++c) row[c] = w.x[c][t];
                x.push_back(std::move(row));
                y.push_back(w.y[t]);
            }
        }
        ForestConfig fc = detail::forest_config_from(cfg);
        fc.jobs = cfg.jobs();
        hp << "trees=" << fc.n_trees << "\nmin_leaf=" << fc.min_samples_leaf << "\n";
        sm.model = forest_train(x, y, fc);
    }
    sm.hyperparams = hp.str();
    save_model(out / "model.gfm", sm);
    cfg.echo_into(out);
    return kExitOk;
}

/// evaluate: runs the experiment protocol for every (model, feature set)
/// combination, writing the metric table, the summary (with ANOVA and
/// pairwise comparisons when the grid is at least 2x2), fold listing, and
/// per-cycle traces for plotting.
inline int cmd_evaluate(const RunConfig& cfg) {
    const auto out = cfg.out_dir("evaluate");
    detail::ensure_output_dir(out, cfg.flag("force"));
    const std::filesystem::path input = cfg.str("evaluate.input");
    if (input.empty()) fail(ErrorKind::ConfigError, "evaluate.input is required");

    const WindowSet raw = load_windows(std::filesystem::is_directory(input)
                                           ? input / "windows.gfw"
                                           : input);
    auto model_names = split_csv(cfg.str("evaluate.models"));
    if (model_names.empty()) model_names = {cfg.str("train.model")};
    auto feature_names = split_csv(cfg.str("evaluate.features"));
    if (feature_names.empty()) feature_names = {cfg.str("train.features")};
    const Protocol protocol = protocol_from_string(cfg.str("evaluate.protocol"));

    EvalConfig ec;
    ec.train = detail::train_config_from(cfg);
    ec.forest = detail::forest_config_from(cfg);
    ec.train_fraction = cfg.num("evaluate.train_fraction");
    ec.jobs = cfg.jobs();
    ec.keep_traces = cfg.flag("evaluate.traces");
    ec.oracle = cfg.flag("evaluate.oracle");

    std::vector<ExperimentResult> results;
    for (const auto& mname : model_names)
        for (const auto& fname : feature_names) {
            const ModelKind kind = model_kind_from_string(mname);
            const FeatureSet features = feature_set_from_string(fname);
            detail::feature_slice_or_fail(ChannelManifest::standard(features), raw.manifest);
            results.push_back(run_experiment(raw, kind, features, protocol, ec));
        }

    write_metrics_tsv(out / "metrics.tsv", results);

    std::ostringstream folds;
    for (const auto& ex : results) {
        folds << "experiment model=" << to_string(ex.model)
              << " features=" << to_string(ex.features) << "\n";
        for (const auto& fold : ex.plan.folds)
            folds << "  fold " << fold.fold_id << " train " << fold.train.size() << " test "
                  << fold.test.size() << "\n";
    }
    write_text_file(out / "folds.txt", folds.str());

    std::set<std::string> distinct_models(model_names.begin(), model_names.end());
    std::set<std::string> distinct_features(feature_names.begin(), feature_names.end());
    if (distinct_models.size() >= 2 && distinct_features.size() >= 2) {
        const StatsReport stats = build_stats(results);
        write_summary_txt(out / "summary.txt", results, &stats);
    } else {
        write_summary_txt(out / "summary.txt", results, nullptr);
    }

    if (ec.keep_traces) {
        std::vector<CycleTrace> traces;
        for (const auto& ex : results)
            traces.insert(traces.end(), ex.traces.begin(), ex.traces.end());
        write_traces_tsv(out / "traces.tsv", traces);
    }
    cfg.echo_into(out);
    return kExitOk;
}

/// report: per-speed epoch plots (median line, 2.5-97.5 percentile band)
/// from the evaluate traces, plus a manifest of the produced images.
inline int cmd_report(const RunConfig& cfg) {
    const auto out = cfg.out_dir("report");
    detail::ensure_output_dir(out, cfg.flag("force"));
    const std::filesystem::path input = cfg.str("report.input");
    if (input.empty()) fail(ErrorKind::ConfigError, "report.input is required");
    const auto traces_path = input / "traces.tsv";
    if (!std::filesystem::exists(traces_path))
        fail(ErrorKind::MissingInputs, "no traces.tsv under " + input.string() +
                                           " (run evaluate with evaluate.traces true)");
    const auto traces = read_traces_tsv(traces_path);
    if (traces.empty()) fail(ErrorKind::MissingInputs, "traces.tsv holds no cycles");

    std::map<std::string, std::pair<std::vector<std::vector<double>>,
                                    std::vector<std::vector<double>>>> by_speed;
    for (const auto& t : traces) {
        auto& bucket = by_speed[speed_label(t.speed)];
        bucket.first.push_back(resample_cycle_gc(t.ref, t.valid_length));
        bucket.second.push_back(resample_cycle_gc(t.est, t.valid_length));
    }

    std::ostringstream manifest;
    for (const auto& [spd, cycles] : by_speed) {
        const EpochBand ref = epoch_band(cycles.first);
        const EpochBand est = epoch_band(cycles.second);
        const std::string name = "epoch_" + spd + ".svg";
        write_epoch_svg(out / name, ref, est,
                        "vGRF epochs at " + spd + " m/s (" +
                            std::to_string(cycles.first.size()) + " cycles)");
        manifest << name << "\n";
    }
    write_text_file(out / "report_manifest.txt", manifest.str());
    cfg.echo_into(out);
    return kExitOk;
}

}  // namespace gaitforce
