#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "gaitforce/common.hpp"
#include "gaitforce/optim.hpp"

namespace gaitforce {

/// Per-sample regressor: input layer, five tanh hidden layers of 20 units,
/// one linear output. tanh keeps the net smooth so analytic gradients can be
/// checked against central finite differences.
struct MlpModel {
    std::vector<int> sizes;               // [D_in, 20, 20, 20, 20, 20, 1]
    std::vector<Eigen::MatrixXd> weights;  // weights[l]: sizes[l+1] x sizes[l]
    std::vector<Eigen::VectorXd> biases;

    static MlpModel standard(int input_size, std::uint64_t seed) {
        return MlpModel(std::vector<int>{input_size, 20, 20, 20, 20, 20, 1}, seed);
    }

    MlpModel() = default;

    MlpModel(std::vector<int> layer_sizes, std::uint64_t seed) : sizes(std::move(layer_sizes)) {
        std::mt19937_64 rng(mix_seed(seed));
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            const int fan_in = sizes[l], fan_out = sizes[l + 1];
            const double limit = std::sqrt(6.0 / (fan_in + fan_out));
            std::uniform_real_distribution<double> dist(-limit, limit);
            Eigen::MatrixXd w(fan_out, fan_in);
            for (int r = 0; r < fan_out; ++r)
                for (int c = 0; c < fan_in; ++c) w(r, c) = dist(rng);
            weights.push_back(std::move(w));
            biases.push_back(Eigen::VectorXd::Zero(fan_out));
        }
    }

    int input_size() const { return sizes.empty() ? 0 : sizes.front(); }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < weights.size(); ++l)
            n += static_cast<std::size_t>(weights[l].size()) +
                 static_cast<std::size_t>(biases[l].size());
        return n;
    }

    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(param_count());
        for (std::size_t l = 0; l < weights.size(); ++l) {
            out.insert(out.end(), weights[l].data(), weights[l].data() + weights[l].size());
            out.insert(out.end(), biases[l].data(), biases[l].data() + biases[l].size());
        }
        return out;
    }

    void unflatten(const std::vector<double>& flat) {
        if (flat.size() != param_count())
            fail(ErrorKind::ShapeMismatch, "flat parameter vector has wrong length");
        std::size_t pos = 0;
        for (std::size_t l = 0; l < weights.size(); ++l) {
            std::copy_n(flat.begin() + pos, weights[l].size(), weights[l].data());
            pos += weights[l].size();
            std::copy_n(flat.begin() + pos, biases[l].size(), biases[l].data());
            pos += biases[l].size();
        }
    }
};

/// Batched forward pass: columns of x are samples. Returns one output row.
inline Eigen::RowVectorXd mlp_forward_batch(const MlpModel& model, const Eigen::MatrixXd& x) {
    if (x.rows() != model.input_size())
        fail(ErrorKind::ShapeMismatch,
             strfmt("mlp input has %ld rows, model expects %d", static_cast<long>(x.rows()),
                    model.input_size()));
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        a = (model.weights[l] * a).colwise() + model.biases[l];
        if (l + 1 < model.weights.size()) a = a.array().tanh().matrix();
    }
    return a.row(0);
}

inline double mlp_forward(const MlpModel& model, const std::vector<double>& x) {
    Eigen::MatrixXd col(x.size(), 1);
    for (std::size_t i = 0; i < x.size(); ++i) col(i, 0) = x[i];
    return mlp_forward_batch(model, col)(0);
}

/// RMSE loss over the batch plus analytic parameter gradients (flat layout
/// matching flatten()).
inline double mlp_loss_grad(const MlpModel& model, const Eigen::MatrixXd& x,
                            const Eigen::RowVectorXd& y, std::vector<double>& grad_out) {
    const std::size_t layers = model.weights.size();
    std::vector<Eigen::MatrixXd> acts(layers + 1);  // post-activation per layer
    acts[0] = x;
    for (std::size_t l = 0; l < layers; ++l) {
        acts[l + 1] = (model.weights[l] * acts[l]).colwise() + model.biases[l];
        if (l + 1 < layers) acts[l + 1] = acts[l + 1].array().tanh().matrix();
    }
    std::vector<double> pred(acts[layers].cols()), target(y.size()), dloss;
    for (Eigen::Index i = 0; i < acts[layers].cols(); ++i) pred[i] = acts[layers](0, i);
    for (Eigen::Index i = 0; i < y.size(); ++i) target[i] = y(i);
    const double loss = rmse_loss_grad(pred, target, dloss);

    Eigen::MatrixXd delta(1, acts[layers].cols());
    for (Eigen::Index i = 0; i < delta.cols(); ++i) delta(0, i) = dloss[i];

    std::vector<Eigen::MatrixXd> dw(layers);
    std::vector<Eigen::VectorXd> db(layers);
    for (std::size_t li = layers; li-- > 0;) {
        dw[li] = delta * acts[li].transpose();
        db[li] = delta.rowwise().sum();
        if (li > 0) {
            Eigen::MatrixXd back = model.weights[li].transpose() * delta;
            // derivative of tanh at the stored activation: 1 - a^2
            delta = (back.array() * (1.0 - acts[li].array().square())).matrix();
        }
    }

    grad_out.clear();
    grad_out.reserve(model.param_count());
    for (std::size_t l = 0; l < layers; ++l) {
        grad_out.insert(grad_out.end(), dw[l].data(), dw[l].data() + dw[l].size());
        grad_out.insert(grad_out.end(), db[l].data(), db[l].data() + db[l].size());
    }
    return loss;
}

/// Trains a given model further with mini-batch gradient descent on the RMSE
/// loss. Deterministic for a fixed config seed.
inline MlpModel mlp_train(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y,
                          const TrainConfig& cfg, MlpModel model,
                          std::vector<double>* loss_history = nullptr) {
    cfg.check();
    if (x.cols() == 0) fail(ErrorKind::EmptyData, "mlp_train without samples");
    if (x.cols() != y.size()) fail(ErrorKind::ShapeMismatch, "mlp_train x/y size mismatch");
    if (x.rows() != model.input_size()) fail(ErrorKind::ShapeMismatch, "mlp_train input width");

    std::vector<double> params = model.flatten();
    GradientStepper stepper(cfg.optimizer, cfg.learning_rate, params.size());
    std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, "mlp-shuffle"));

    std::vector<Eigen::Index> order(x.cols());
    std::iota(order.begin(), order.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        int batches = 0;
        for (Eigen::Index start = 0; start < x.cols(); start += cfg.batch_size) {
            const Eigen::Index bs = std::min<Eigen::Index>(cfg.batch_size, x.cols() - start);
            Eigen::MatrixXd xb(x.rows(), bs);
            Eigen::RowVectorXd yb(bs);
            for (Eigen::Index i = 0; i < bs; ++i) {
                xb.col(i) = x.col(order[start + i]);
                yb(i) = y(order[start + i]);
            }
            std::vector<double> grads;
            const double loss = mlp_loss_grad(model, xb, yb, grads);
            if (!std::isfinite(loss)) fail(ErrorKind::DivergenceDetected, "mlp loss is not finite");
            params = model.flatten();
            stepper.step(params, grads);
            model.unflatten(params);
            epoch_loss += loss;
            ++batches;
        }
        epoch_loss /= std::max(batches, 1);
        if (loss_history) loss_history->push_back(epoch_loss);
        if (epoch_loss < best - 1e-12) {
            best = epoch_loss;
            since_best = 0;
        } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
            break;
        }
    }
    return model;
}

/// Fresh standard architecture seeded from the config.
inline MlpModel mlp_train(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y,
                          const TrainConfig& cfg, std::vector<double>* loss_history = nullptr) {
    return mlp_train(x, y, cfg,
                     MlpModel::standard(static_cast<int>(x.rows()), derive_seed(cfg.seed, "mlp-init")),
                     loss_history);
}

}  // namespace gaitforce
