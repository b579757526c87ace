#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gaitforce/common.hpp"

namespace gaitforce {

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
    int epochs = 60;
    int batch_size = 8;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::Adam;
    int patience = 0;  // epochs without improvement before stopping; 0 = off
    double dropout = 0.2;  // BiLSTM inter-layer dropout
    std::uint64_t seed = 1;

    void check() const {
        if (epochs <= 0 || batch_size <= 0 || !(learning_rate > 0.0) || patience < 0 ||
            dropout < 0.0 || dropout >= 1.0)
            fail(ErrorKind::ConfigError, "train config values must be positive");
    }
};

/// Adaptive-moment gradient step over one flat parameter vector; falls back
/// to plain gradient descent when so configured.
class GradientStepper {
public:
    GradientStepper(Optimizer kind, double lr, std::size_t n)
        : kind_(kind), lr_(lr), m_(kind == Optimizer::Adam ? n : 0, 0.0),
          v_(kind == Optimizer::Adam ? n : 0, 0.0) {}

    void step(std::vector<double>& params, const std::vector<double>& grads) {
        if (params.size() != grads.size())
            fail(ErrorKind::ShapeMismatch, "gradient size differs from parameter size");
        if (kind_ == Optimizer::Sgd) {
            for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grads[i];
            return;
        }
        ++t_;
        const double b1c = 1.0 - std::pow(kBeta1, t_);
        const double b2c = 1.0 - std::pow(kBeta2, t_);
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grads[i];
            v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grads[i] * grads[i];
            params[i] -= lr_ * (m_[i] / b1c) / (std::sqrt(v_[i] / b2c) + kEps);
        }
    }

private:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;

    Optimizer kind_;
    double lr_;
    int t_ = 0;
    std::vector<double> m_, v_;
};

/// RMSE loss over flattened predictions, plus d(loss)/d(pred). The gradient
/// of sqrt(mean(d^2)) is d / (n * loss); at a perfect fit it is zero.
inline double rmse_loss_grad(const std::vector<double>& pred, const std::vector<double>& target,
                             std::vector<double>& grad_out) {
    if (pred.size() != target.size() || pred.empty())
        fail(ErrorKind::ShapeMismatch, "loss needs equal non-empty prediction/target");
    const double n = static_cast<double>(pred.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        ss += d * d;
    }
    const double loss = std::sqrt(ss / n);
    grad_out.assign(pred.size(), 0.0);
    if (loss > 1e-300) {
        for (std::size_t i = 0; i < pred.size(); ++i)
            grad_out[i] = (pred[i] - target[i]) / (n * loss);
    }
    return loss;
}

}  // namespace gaitforce
