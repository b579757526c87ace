#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "gaitforce/cli.hpp"

namespace {

struct Override {
    std::string key;
    std::string value;
    bool set = false;
};

int exit_code_for(const gaitforce::Error& e) {
    using gaitforce::ErrorKind;
    switch (e.kind()) {
        case ErrorKind::ConfigError:
            return gaitforce::kExitUsage;
        case ErrorKind::IoError:
        case ErrorKind::CorruptFile:
        case ErrorKind::VersionMismatch:
        case ErrorKind::MissingInputs:
            return gaitforce::kExitIo;
        default:
            return gaitforce::kExitInternal;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vGRF estimation pipeline: synthetic gait, CoPS extraction, model training, "
                 "and peak-level evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "configuration file (key value per line)");
    app.add_option("--set", sets, "override a config key, e.g. --set train.epochs=5")
        ->take_all();

    Override seed, out, jobs, force;
    app.add_option_function<std::string>(
        "--seed", [&](const std::string& v) { seed = {"seed", v, true}; }, "rng seed");
    app.add_option_function<std::string>(
        "--out", [&](const std::string& v) { out = {"out", v, true}; }, "output directory");
    app.add_option_function<std::string>(
        "--jobs", [&](const std::string& v) { jobs = {"jobs", v, true}; },
        "worker count (0 = all cores); never changes results");
    app.add_flag_function(
        "--force", [&](std::int64_t) { force = {"force", "true", true}; },
        "allow writing into a non-empty output directory");

    std::vector<std::pair<std::string, Override>> flag_overrides;
    auto add_key_flag = [&](CLI::App* cmd, const std::string& flag, const std::string& key,
                            const std::string& help) {
        auto holder = std::make_shared<Override>();
        cmd->add_option_function<std::string>(
            flag,
            [&flag_overrides, key, holder](const std::string& v) {
                flag_overrides.push_back({key, {key, v, true}});
            },
            help);
    };

    auto* sim = app.add_subcommand("simulate", "generate the synthetic dataset as trial dirs");
    add_key_flag(sim, "--subjects", "simulate.subjects", "number of subjects (default 8)");
    add_key_flag(sim, "--duration", "simulate.duration_s", "trial duration in seconds");

    auto* pre = app.add_subcommand("preprocess", "trial dirs -> gait-cycle window container");
    add_key_flag(pre, "--input", "preprocess.input", "dataset directory from simulate");
    add_key_flag(pre, "--max-cycles", "preprocess.max_cycles_per_foot",
                 "cap cycles per trial and foot (0 = all)");

    auto* trn = app.add_subcommand("train", "fit one model on a window container");
    add_key_flag(trn, "--input", "train.input", "window container or preprocess directory");
    add_key_flag(trn, "--model", "train.model", "mlp | rf | lstm");
    add_key_flag(trn, "--features", "train.features", "T1 | T2 | T3");
    add_key_flag(trn, "--epochs", "train.epochs", "training epochs");
    add_key_flag(trn, "--batch", "train.batch", "batch size");
    add_key_flag(trn, "--lr", "train.lr", "learning rate");

    auto* eva = app.add_subcommand("evaluate", "run the experiment protocol and write reports");
    add_key_flag(eva, "--input", "evaluate.input", "window container or preprocess directory");
    add_key_flag(eva, "--protocol", "evaluate.protocol", "intra | inter");
    add_key_flag(eva, "--models", "evaluate.models", "comma list of model kinds");
    add_key_flag(eva, "--features", "evaluate.features", "comma list of feature sets");
    add_key_flag(eva, "--epochs", "train.epochs", "training epochs");
    add_key_flag(eva, "--batch", "train.batch", "batch size");
    add_key_flag(eva, "--oracle", "evaluate.oracle", "true: echo the reference (upper bound)");
    add_key_flag(eva, "--traces", "evaluate.traces", "true|false: per-cycle trace dumps");

    auto* rep = app.add_subcommand("report", "epoch plots from evaluate traces");
    add_key_flag(rep, "--input", "report.input", "evaluate output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        gaitforce::RunConfig cfg;
        if (!config_path.empty()) cfg.load_file(config_path);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                gaitforce::fail(gaitforce::ErrorKind::ConfigError,
                                "--set expects key=value, got '" + s + "'");
            cfg.set(s.substr(0, eq), s.substr(eq + 1));
        }
        for (const Override* o : {&seed, &out, &jobs, &force})
            if (o->set) cfg.set(o->key, o->value);
        for (const auto& [key, o] : flag_overrides)
            if (o.set) cfg.set(key, o.value);

        if (app.got_subcommand(sim)) return gaitforce::cmd_simulate(cfg);
        if (app.got_subcommand(pre)) return gaitforce::cmd_preprocess(cfg);
        if (app.got_subcommand(trn)) return gaitforce::cmd_train(cfg);
        if (app.got_subcommand(eva)) return gaitforce::cmd_evaluate(cfg);
        if (app.got_subcommand(rep)) return gaitforce::cmd_report(cfg);
        return gaitforce::kExitUsage;
    } catch (const gaitforce::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return gaitforce::kExitInternal;
    }
}
