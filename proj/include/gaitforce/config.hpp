#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gaitforce/io_util.hpp"

namespace gaitforce {

/// Run configuration: nested dotted keys in a plain-text file ("key value"
/// per line, '#' comments), a strict schema that rejects unknown keys, CLI
/// overrides on top, and the effective merged result echoed into every
/// command's output directory.
class RunConfig {
public:
    RunConfig() {
        static const std::map<std::string, std::string> defaults = {
            {"seed", "1"},
            {"jobs", "0"},  // 0 = hardware concurrency
            {"out", ""},
            {"force", "false"},
            {"simulate.subjects", "8"},
            {"simulate.duration_s", "90"},
            {"preprocess.input", ""},
            {"preprocess.contact_threshold_bw", "0.05"},
            {"preprocess.debounce_ms", "50"},
            {"preprocess.settle_s", "2"},
            {"preprocess.max_cycles_per_foot", "0"},
            {"train.input", ""},
            {"train.model", "lstm"},
            {"train.features", "T3"},
            {"train.epochs", "30"},
            {"train.batch", "8"},
            {"train.lr", "0.001"},
            {"train.dropout", "0.2"},
            {"train.patience", "0"},
            {"train.optimizer", "adam"},
            {"train.forest_trees", "200"},
            {"train.forest_min_leaf", "2"},
            {"train.forest_bootstrap", "true"},
            {"train.forest_aggregate", "mean"},
            {"evaluate.input", ""},
            {"evaluate.protocol", "intra"},
            {"evaluate.train_fraction", "0.7"},
            {"evaluate.models", ""},    // comma list; empty = train.model
            {"evaluate.features", ""},  // comma list; empty = train.features
            {"evaluate.traces", "true"},
            {"evaluate.oracle", "false"},
            {"report.input", ""},
        };
        values_ = defaults;
    }

    void load_file(const std::filesystem::path& path) {
        std::istringstream is(read_text_file(path));
        std::string line;
        while (std::getline(is, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            const auto toks = split_ws(line);
            if (toks.empty()) continue;
            const std::string key = toks[0];
            std::string value;
            for (std::size_t i = 1; i < toks.size(); ++i)
                value += (i > 1 ? " " : "") + toks[i];
            set(key, value);
        }
    }

    void set(const std::string& key, const std::string& value) {
        if (!values_.count(key))
            fail(ErrorKind::ConfigError, "unknown config key '" + key + "'");
        values_[key] = value;
    }

    const std::string& str(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) fail(ErrorKind::ConfigError, "unknown config key '" + key + "'");
        return it->second;
    }

    double num(const std::string& key) const {
        try {
            return parse_double(str(key), key);
        } catch (const Error&) {
            fail(ErrorKind::ConfigError, "config key '" + key + "' is not a number");
        }
    }

    long integer(const std::string& key) const {
        const double v = num(key);
        if (v != static_cast<double>(static_cast<long>(v)))
            fail(ErrorKind::ConfigError, "config key '" + key + "' is not an integer");
        return static_cast<long>(v);
    }

    bool flag(const std::string& key) const {
        const std::string& v = str(key);
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        fail(ErrorKind::ConfigError, "config key '" + key + "' is not a boolean");
    }

    std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("seed")); }
    unsigned jobs() const { return static_cast<unsigned>(integer("jobs")); }

    /// Output directory: --out/out key, else $GAITFORCE_OUT_ROOT/<command>,
    /// else ./gaitforce-out/<command>.
    std::filesystem::path out_dir(const std::string& command) const {
        if (!str("out").empty()) return str("out");
        if (const char* root = std::getenv("GAITFORCE_OUT_ROOT"))
            return std::filesystem::path(root) / command;
        return std::filesystem::path("gaitforce-out") / command;
    }

    /// The effective merged configuration, sorted, one "key value" per line.
    std::string serialize() const {
        std::ostringstream os;
        for (const auto& [k, v] : values_) os << k << " " << v << "\n";
        return os.str();
    }

    void echo_into(const std::filesystem::path& dir) const {
        write_text_file(dir / "config.effective.txt", serialize());
    }

private:
    std::map<std::string, std::string> values_;
};

inline std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace gaitforce
