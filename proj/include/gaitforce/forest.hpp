#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "gaitforce/common.hpp"

namespace gaitforce {

enum class ForestAggregate { Mean, Median };

struct ForestConfig {
    int n_trees = 200;
    int min_samples_leaf = 2;
    bool bootstrap = true;
    ForestAggregate aggregate = ForestAggregate::Mean;  // median available as alternative
    std::uint64_t seed = 1;
    unsigned jobs = 1;
};

/// Flat-array regression tree; feature < 0 marks a leaf.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict(const std::vector<double>& x) const {
        std::uint32_t idx = 0;
        while (nodes[idx].feature >= 0)
            idx = x[static_cast<std::size_t>(nodes[idx].feature)] < nodes[idx].threshold
                      ? nodes[idx].left
                      : nodes[idx].right;
        return nodes[idx].value;
    }
};

struct ForestModel {
    ForestConfig config;
    std::vector<RegressionTree> trees;
};

namespace detail {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double sse = std::numeric_limits<double>::infinity();
    std::size_t left_count = 0;
};

/// Exact greedy split over all features: sort by feature value, scan prefix
/// sums of y and y^2 for the SSE of each admissible cut. Ties go to the
/// lowest feature index, then the smallest threshold, keeping tree growth
/// deterministic.
inline SplitChoice best_split(const std::vector<std::vector<double>>& x,
                              const std::vector<double>& y, std::vector<std::size_t>& idx,
                              std::size_t lo, std::size_t hi, int min_leaf) {
    const std::size_t n = hi - lo;
    SplitChoice best;
    const std::size_t n_features = x.front().size();
    std::vector<std::size_t> order(idx.begin() + lo, idx.begin() + hi);
    for (std::size_t f = 0; f < n_features; ++f) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return x[a][f] < x[b][f];
        });
        double sum_left = 0.0, sq_left = 0.0, sum_right = 0.0, sq_right = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum_right += y[order[i]];
            sq_right += y[order[i]] * y[order[i]];
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double yi = y[order[i]];
            sum_left += yi;
            sq_left += yi * yi;
            sum_right -= yi;
            sq_right -= yi * yi;
            const double a = x[order[i]][f], b = x[order[i + 1]][f];
            if (!(b > a)) continue;  // no cut between equal values
            const std::size_t nl = i + 1, nr = n - nl;
            if (nl < static_cast<std::size_t>(min_leaf) || nr < static_cast<std::size_t>(min_leaf))
                continue;
            const double sse = (sq_left - sum_left * sum_left / static_cast<double>(nl)) +
                               (sq_right - sum_right * sum_right / static_cast<double>(nr));
            if (sse < best.sse - 1e-15) {
                best.feature = static_cast<int>(f);
                best.threshold = 0.5 * (a + b);
                best.sse = sse;
                best.left_count = nl;
            }
        }
    }
    return best;
}

inline std::uint32_t grow_node(RegressionTree& tree, const std::vector<std::vector<double>>& x,
                               const std::vector<double>& y, std::vector<std::size_t>& idx,
                               std::size_t lo, std::size_t hi, int min_leaf) {
    const std::uint32_t node_id = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    const std::size_t n = hi - lo;
    double y_min = y[idx[lo]], y_max = y[idx[lo]];
    double mean = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        mean += y[idx[i]];
        y_min = std::min(y_min, y[idx[i]]);
        y_max = std::max(y_max, y[idx[i]]);
    }
    mean /= static_cast<double>(n);
    // constant targets make an exact leaf; no split can improve on it
    if (y_min == y_max) {
        tree.nodes[node_id].value = y_min;
        return node_id;
    }
    tree.nodes[node_id].value = mean;

    if (n < 2 * static_cast<std::size_t>(min_leaf)) return node_id;
    const auto split = best_split(x, y, idx, lo, hi, min_leaf);
    if (split.feature < 0) return node_id;

    const auto mid = std::stable_partition(
        idx.begin() + lo, idx.begin() + hi,
        [&](std::size_t i) { return x[i][static_cast<std::size_t>(split.feature)] < split.threshold; });
    const std::size_t split_at = static_cast<std::size_t>(mid - idx.begin());

    tree.nodes[node_id].feature = split.feature;
    tree.nodes[node_id].threshold = split.threshold;
    const std::uint32_t left = grow_node(tree, x, y, idx, lo, split_at, min_leaf);
    const std::uint32_t right = grow_node(tree, x, y, idx, split_at, hi, min_leaf);
    tree.nodes[node_id].left = left;
    tree.nodes[node_id].right = right;
    return node_id;
}

}  // namespace detail

/// Bootstrap-aggregated regression trees. Splits minimize the sum of squared
/// errors; leaves predict the mean of their samples. Per-tree seeds derive
/// from the config seed, so the result is independent of the worker count.
inline ForestModel forest_train(const std::vector<std::vector<double>>& x,
                                const std::vector<double>& y, const ForestConfig& cfg = {}) {
    if (x.size() != y.size()) fail(ErrorKind::LengthMismatch, "forest_train x/y size mismatch");
    if (x.size() < 4)
        fail(ErrorKind::TooFewSamples, strfmt("forest needs >= 4 samples, got %zu", x.size()));
    if (cfg.n_trees <= 0 || cfg.min_samples_leaf <= 0)
        fail(ErrorKind::ConfigError, "forest config values must be positive");

    ForestModel model;
    model.config = cfg;
    model.trees.resize(static_cast<std::size_t>(cfg.n_trees));
    parallel_for(model.trees.size(), cfg.jobs, [&](std::size_t t) {
        std::mt19937_64 rng(derive_seed(cfg.seed, 0x464f5245u + t));
        std::vector<std::size_t> idx(x.size());
        if (cfg.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
            for (auto& i : idx) i = pick(rng);
            std::sort(idx.begin(), idx.end());
        } else {
            std::iota(idx.begin(), idx.end(), 0);
        }
        RegressionTree tree;
        detail::grow_node(tree, x, y, idx, 0, idx.size(), cfg.min_samples_leaf);
        model.trees[t] = std::move(tree);
    });
    return model;
}

/// Aggregate of the individual trees: mean by default (the regression
/// counterpart of voting), median as the configurable alternative.
inline double forest_predict(const ForestModel& model, const std::vector<double>& x) {
    if (model.trees.empty()) fail(ErrorKind::EmptyData, "forest has no trees");
    std::vector<double> preds(model.trees.size());
    for (std::size_t t = 0; t < model.trees.size(); ++t) preds[t] = model.trees[t].predict(x);
    if (model.config.aggregate == ForestAggregate::Median) {
        std::sort(preds.begin(), preds.end());
        const std::size_t n = preds.size();
        return n % 2 == 1 ? preds[n / 2] : 0.5 * (preds[n / 2 - 1] + preds[n / 2]);
    }
    double s = 0.0;
    for (double p : preds) s += p;
    return s / static_cast<double>(preds.size());
}

}  // namespace gaitforce
