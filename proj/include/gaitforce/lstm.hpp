#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "gaitforce/common.hpp"
#include "gaitforce/optim.hpp"

namespace gaitforce {

/// One sequence sample: x is channel-major [C][T], y is [T].
struct SeqSample {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
};

struct LstmDirParams {
    // Gate rows are packed [input; forget; candidate; output], H rows each.
    Eigen::MatrixXd wx;  // 4H x input
    Eigen::MatrixXd wh;  // 4H x H
    Eigen::VectorXd b;   // 4H
};

struct LstmLayer {
    std::array<LstmDirParams, 2> dir;  // [0] forward in time, [1] backward
};

/// Stacked bidirectional LSTM with a per-step linear head. The standard
/// configuration is 4 layers of 128 units per direction with inter-layer
/// dropout; tests may build smaller variants through custom().
struct BiLstmModel {
    int input_size = 0;
    int hidden_size = 0;
    int num_layers = 0;
    double dropout = 0.2;
    std::vector<LstmLayer> layers;
    Eigen::RowVectorXd head_w;  // 1 x 2H
    double head_b = 0.0;

    static BiLstmModel standard(int channels, std::uint64_t seed) {
        return custom(channels, 4, 128, seed);
    }

    static BiLstmModel custom(int channels, int n_layers, int hidden, std::uint64_t seed) {
        if (channels <= 0 || n_layers <= 0 || hidden <= 0)
            fail(ErrorKind::ShapeMismatch, "lstm dimensions must be positive");
        BiLstmModel m;
        m.input_size = channels;
        m.hidden_size = hidden;
        m.num_layers = n_layers;
        std::mt19937_64 rng(mix_seed(seed));
        const double limit = 1.0 / std::sqrt(static_cast<double>(hidden));
        std::uniform_real_distribution<double> dist(-limit, limit);
        auto fill = [&](Eigen::MatrixXd& mat, Eigen::Index rows, Eigen::Index cols) {
            mat.resize(rows, cols);
            for (Eigen::Index c = 0; c < cols; ++c)
                for (Eigen::Index r = 0; r < rows; ++r) mat(r, c) = dist(rng);
        };
        for (int l = 0; l < n_layers; ++l) {
            LstmLayer layer;
            const int in = l == 0 ? channels : 2 * hidden;
            for (auto& d : layer.dir) {
                fill(d.wx, 4 * hidden, in);
                fill(d.wh, 4 * hidden, hidden);
                d.b.resize(4 * hidden);
                for (Eigen::Index i = 0; i < d.b.size(); ++i) d.b(i) = dist(rng);
            }
            m.layers.push_back(std::move(layer));
        }
        m.head_w.resize(2 * hidden);
        for (Eigen::Index i = 0; i < m.head_w.size(); ++i) m.head_w(i) = dist(rng);
        m.head_b = 0.0;
        return m;
    }

    void check_shapes() const {
        if (static_cast<int>(layers.size()) != num_layers)
            fail(ErrorKind::ShapeMismatch, "lstm layer count mismatch");
        for (int l = 0; l < num_layers; ++l) {
            const int in = l == 0 ? input_size : 2 * hidden_size;
            for (const auto& d : layers[l].dir)
                if (d.wx.rows() != 4 * hidden_size || d.wx.cols() != in ||
                    d.wh.rows() != 4 * hidden_size || d.wh.cols() != hidden_size ||
                    d.b.size() != 4 * hidden_size)
                    fail(ErrorKind::ShapeMismatch, "lstm gate matrix shape mismatch");
        }
        if (head_w.size() != 2 * hidden_size)
            fail(ErrorKind::ShapeMismatch, "lstm head shape mismatch");
    }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (const auto& layer : layers)
            for (const auto& d : layer.dir)
                n += static_cast<std::size_t>(d.wx.size() + d.wh.size() + d.b.size());
        return n + static_cast<std::size_t>(head_w.size()) + 1;
    }

    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(param_count());
        for (const auto& layer : layers)
            for (const auto& d : layer.dir) {
                out.insert(out.end(), d.wx.data(), d.wx.data() + d.wx.size());
                out.insert(out.end(), d.wh.data(), d.wh.data() + d.wh.size());
                out.insert(out.end(), d.b.data(), d.b.data() + d.b.size());
            }
        out.insert(out.end(), head_w.data(), head_w.data() + head_w.size());
        out.push_back(head_b);
        return out;
    }

    void unflatten(const std::vector<double>& flat) {
        if (flat.size() != param_count())
            fail(ErrorKind::ShapeMismatch, "flat parameter vector has wrong length");
        std::size_t pos = 0;
        for (auto& layer : layers)
            for (auto& d : layer.dir) {
                std::copy_n(flat.begin() + pos, d.wx.size(), d.wx.data());
                pos += d.wx.size();
                std::copy_n(flat.begin() + pos, d.wh.size(), d.wh.data());
                pos += d.wh.size();
                std::copy_n(flat.begin() + pos, d.b.size(), d.b.data());
                pos += d.b.size();
            }
        std::copy_n(flat.begin() + pos, head_w.size(), head_w.data());
        pos += head_w.size();
        head_b = flat[pos];
    }
};

namespace detail {

inline Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) {
    return 1.0 / (1.0 + (-z).exp());
}

/// Everything the backward pass needs, stored per layer and direction as
/// H x (T*B) matrices with step t occupying columns [t*B, (t+1)*B).
struct LstmCache {
    std::vector<std::array<Eigen::MatrixXd, 2>> gi, gf, gg, go, c, tc;
    std::vector<std::array<Eigen::MatrixXd, 2>> h;
    std::vector<Eigen::MatrixXd> inputs;  // per layer, after dropout
    Eigen::MatrixXd top;                  // 2H x T*B
};

/// Forward pass over a batch laid out as x: (C x T*B). Returns the head
/// output (1 x T*B). When `cache` is given, activations are stored for BPTT;
/// `masks` (one per layer boundary) apply inverted dropout at train time.
inline Eigen::RowVectorXd lstm_forward_core(const BiLstmModel& m, const Eigen::MatrixXd& x, int T,
                                            int B, const std::vector<Eigen::MatrixXd>* masks,
                                            LstmCache* cache) {
    const int H = m.hidden_size;
    if (x.rows() != m.input_size)
        fail(ErrorKind::ShapeMismatch,
             strfmt("lstm input has %ld channels, model expects %d", static_cast<long>(x.rows()),
                    m.input_size));
    if (x.cols() != static_cast<Eigen::Index>(T) * B)
        fail(ErrorKind::ShapeMismatch, "lstm input column count is not T*B");

    if (cache) {
        cache->gi.resize(m.num_layers);
        cache->gf.resize(m.num_layers);
        cache->gg.resize(m.num_layers);
        cache->go.resize(m.num_layers);
        cache->c.resize(m.num_layers);
        cache->tc.resize(m.num_layers);
        cache->h.resize(m.num_layers);
        cache->inputs.resize(m.num_layers);
    }

    Eigen::MatrixXd input = x;
    Eigen::MatrixXd out(2 * H, static_cast<Eigen::Index>(T) * B);
    for (int l = 0; l < m.num_layers; ++l) {
        if (cache) cache->inputs[l] = input;
        for (int d = 0; d < 2; ++d) {
            const auto& p = m.layers[l].dir[d];
            Eigen::MatrixXd g = (p.wx * input).colwise() + p.b;  // 4H x T*B
            Eigen::MatrixXd hs(H, static_cast<Eigen::Index>(T) * B);
            Eigen::MatrixXd hprev = Eigen::MatrixXd::Zero(H, B);
            Eigen::MatrixXd cprev = Eigen::MatrixXd::Zero(H, B);
            if (cache) {
                cache->gi[l][d].resize(H, static_cast<Eigen::Index>(T) * B);
                cache->gf[l][d].resize(H, static_cast<Eigen::Index>(T) * B);
                cache->gg[l][d].resize(H, static_cast<Eigen::Index>(T) * B);
                cache->go[l][d].resize(H, static_cast<Eigen::Index>(T) * B);
                cache->c[l][d].resize(H, static_cast<Eigen::Index>(T) * B);
                cache->tc[l][d].resize(H, static_cast<Eigen::Index>(T) * B);
            }
            for (int s = 0; s < T; ++s) {
                const int t = d == 0 ? s : T - 1 - s;
                auto gt = g.middleCols(static_cast<Eigen::Index>(t) * B, B);
                gt.noalias() += p.wh * hprev;
                const Eigen::ArrayXXd zi = gt.topRows(H).array();
                const Eigen::ArrayXXd zf = gt.middleRows(H, H).array();
                const Eigen::ArrayXXd zg = gt.middleRows(2 * H, H).array();
                const Eigen::ArrayXXd zo = gt.bottomRows(H).array();
                const Eigen::ArrayXXd ai = sigmoid(zi);
                const Eigen::ArrayXXd af = sigmoid(zf);
                const Eigen::ArrayXXd ag = zg.tanh();
                const Eigen::ArrayXXd ao = sigmoid(zo);
                const Eigen::ArrayXXd ac = af * cprev.array() + ai * ag;
                const Eigen::ArrayXXd atc = ac.tanh();
                const Eigen::ArrayXXd ah = ao * atc;
                hs.middleCols(static_cast<Eigen::Index>(t) * B, B) = ah.matrix();
                if (cache) {
                    cache->gi[l][d].middleCols(static_cast<Eigen::Index>(t) * B, B) = ai.matrix();
                    cache->gf[l][d].middleCols(static_cast<Eigen::Index>(t) * B, B) = af.matrix();
                    cache->gg[l][d].middleCols(static_cast<Eigen::Index>(t) * B, B) = ag.matrix();
                    cache->go[l][d].middleCols(static_cast<Eigen::Index>(t) * B, B) = ao.matrix();
                    cache->c[l][d].middleCols(static_cast<Eigen::Index>(t) * B, B) = ac.matrix();
                    cache->tc[l][d].middleCols(static_cast<Eigen::Index>(t) * B, B) = atc.matrix();
                }
                hprev = ah.matrix();
                cprev = ac.matrix();
            }
            out.middleRows(d * H, H) = hs;
            if (cache) cache->h[l][d] = std::move(hs);
        }
        if (masks && l + 1 < m.num_layers) {
            out = out.cwiseProduct((*masks)[static_cast<std::size_t>(l)]);
        }
        input = out;
    }
    if (cache) cache->top = input;
    return (m.head_w * input).array() + m.head_b;
}

}  // namespace detail

/// Sequence-to-sequence inference for one window: x is [C][T], the result is
/// the per-step vGRF estimate [T]. Eval mode (no dropout), deterministic.
inline std::vector<double> lstm_forward(const BiLstmModel& model,
                                        const std::vector<std::vector<double>>& x) {
    model.check_shapes();
    if (static_cast<int>(x.size()) != model.input_size)
        fail(ErrorKind::ShapeMismatch,
             strfmt("window has %zu channels, model expects %d", x.size(), model.input_size));
    const int T = static_cast<int>(x.front().size());
    Eigen::MatrixXd xin(model.input_size, T);
    for (int c = 0; c < model.input_size; ++c) {
        if (static_cast<int>(x[c].size()) != T)
            fail(ErrorKind::ShapeMismatch, "ragged window channels");
        for (int t = 0; t < T; ++t) xin(c, t) = x[c][t];
    }
    const auto yhat = detail::lstm_forward_core(model, xin, T, 1, nullptr, nullptr);
    return std::vector<double>(yhat.data(), yhat.data() + yhat.size());
}

/// Batched inference over several equally sized windows.
inline std::vector<std::vector<double>> lstm_forward_batch(const BiLstmModel& model,
                                                           const std::vector<const SeqSample*>& batch) {
    if (batch.empty()) return {};
    const int T = static_cast<int>(batch.front()->y.size());
    const int B = static_cast<int>(batch.size());
    Eigen::MatrixXd xin(model.input_size, static_cast<Eigen::Index>(T) * B);
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < model.input_size; ++c)
            for (int t = 0; t < T; ++t)
                xin(c, static_cast<Eigen::Index>(t) * B + b) = batch[b]->x[c][t];
    const auto yhat = detail::lstm_forward_core(model, xin, T, B, nullptr, nullptr);
    std::vector<std::vector<double>> out(B, std::vector<double>(T));
    for (int b = 0; b < B; ++b)
        for (int t = 0; t < T; ++t) out[b][t] = yhat(static_cast<Eigen::Index>(t) * B + b);
    return out;
}

/// RMSE loss over every step of the batch plus analytic gradients for all
/// parameters (flat layout matching flatten()). Backpropagation through time
/// runs over the full window; padded steps count, their target being the
/// swing value 0.
inline double lstm_loss_grad(const BiLstmModel& m, const Eigen::MatrixXd& x,
                             const Eigen::RowVectorXd& target, int T, int B,
                             const std::vector<Eigen::MatrixXd>* masks,
                             std::vector<double>& grad_out) {
    const int H = m.hidden_size;
    detail::LstmCache cache;
    const Eigen::RowVectorXd yhat = detail::lstm_forward_core(m, x, T, B, masks, &cache);

    std::vector<double> pred(yhat.data(), yhat.data() + yhat.size());
    std::vector<double> tgt(target.data(), target.data() + target.size());
    std::vector<double> dpred;
    const double loss = rmse_loss_grad(pred, tgt, dpred);
    Eigen::RowVectorXd dyhat =
        Eigen::Map<const Eigen::RowVectorXd>(dpred.data(), static_cast<Eigen::Index>(dpred.size()));

    // Parameter gradients mirrored onto the model layout.
    std::vector<LstmLayer> dlayers(m.num_layers);
    for (int l = 0; l < m.num_layers; ++l)
        for (int d = 0; d < 2; ++d) {
            dlayers[l].dir[d].wx = Eigen::MatrixXd::Zero(m.layers[l].dir[d].wx.rows(),
                                                         m.layers[l].dir[d].wx.cols());
            dlayers[l].dir[d].wh = Eigen::MatrixXd::Zero(4 * H, H);
            dlayers[l].dir[d].b = Eigen::VectorXd::Zero(4 * H);
        }

    Eigen::RowVectorXd dhead_w = dyhat * cache.top.transpose();
    const double dhead_b = dyhat.sum();
    Eigen::MatrixXd dout = m.head_w.transpose() * dyhat;  // 2H x T*B

    for (int l = m.num_layers - 1; l >= 0; --l) {
        if (masks && l < m.num_layers - 1)
            dout = dout.cwiseProduct((*masks)[static_cast<std::size_t>(l)]);

        Eigen::MatrixXd dinput;
        const bool need_dinput = l > 0;
        if (need_dinput)
            dinput = Eigen::MatrixXd::Zero(cache.inputs[l].rows(), cache.inputs[l].cols());

        for (int d = 0; d < 2; ++d) {
            const auto& p = m.layers[l].dir[d];
            auto& dp = dlayers[l].dir[d];
            Eigen::MatrixXd dz(4 * H, static_cast<Eigen::Index>(T) * B);
            Eigen::MatrixXd carry_dh = Eigen::MatrixXd::Zero(H, B);
            Eigen::MatrixXd carry_dc = Eigen::MatrixXd::Zero(H, B);
            for (int s = T - 1; s >= 0; --s) {
                const int t = d == 0 ? s : T - 1 - s;
                const Eigen::Index col = static_cast<Eigen::Index>(t) * B;
                const auto ai = cache.gi[l][d].middleCols(col, B).array();
                const auto af = cache.gf[l][d].middleCols(col, B).array();
                const auto ag = cache.gg[l][d].middleCols(col, B).array();
                const auto ao = cache.go[l][d].middleCols(col, B).array();
                const auto atc = cache.tc[l][d].middleCols(col, B).array();

                const Eigen::ArrayXXd dh =
                    dout.middleRows(d * H, H).middleCols(col, B).array() + carry_dh.array();
                const Eigen::ArrayXXd do_ = dh * atc;
                const Eigen::ArrayXXd dc = carry_dc.array() + dh * ao * (1.0 - atc.square());

                Eigen::ArrayXXd cprev(H, B);
                if (s == 0) {
                    cprev.setZero();
                } else {
                    const int t_prev = d == 0 ? t - 1 : t + 1;
                    cprev = cache.c[l][d].middleCols(static_cast<Eigen::Index>(t_prev) * B, B).array();
                }
                const Eigen::ArrayXXd di = dc * ag;
                const Eigen::ArrayXXd dg = dc * ai;
                const Eigen::ArrayXXd df = dc * cprev;

                dz.middleRows(0, H).middleCols(col, B) = (di * ai * (1.0 - ai)).matrix();
                dz.middleRows(H, H).middleCols(col, B) = (df * af * (1.0 - af)).matrix();
                dz.middleRows(2 * H, H).middleCols(col, B) = (dg * (1.0 - ag.square())).matrix();
                dz.middleRows(3 * H, H).middleCols(col, B) = (do_ * ao * (1.0 - ao)).matrix();

                carry_dh.noalias() = p.wh.transpose() * dz.middleCols(col, B);
                carry_dc = (dc * af).matrix();
            }

            // h_{prev-in-direction} per step, zeros at the direction's start.
            Eigen::MatrixXd hprev(H, static_cast<Eigen::Index>(T) * B);
            for (int t = 0; t < T; ++t) {
                const int t_prev = d == 0 ? t - 1 : t + 1;
                if (t_prev < 0 || t_prev >= T)
                    hprev.middleCols(static_cast<Eigen::Index>(t) * B, B).setZero();
                else
                    hprev.middleCols(static_cast<Eigen::Index>(t) * B, B) =
                        cache.h[l][d].middleCols(static_cast<Eigen::Index>(t_prev) * B, B);
            }

            dp.wx.noalias() = dz * cache.inputs[l].transpose();
            dp.wh.noalias() = dz * hprev.transpose();
            dp.b = dz.rowwise().sum();
            if (need_dinput) dinput.noalias() += p.wx.transpose() * dz;
        }
        if (need_dinput) dout = std::move(dinput);
    }

    grad_out.clear();
    grad_out.reserve(m.param_count());
    for (const auto& layer : dlayers)
        for (const auto& d : layer.dir) {
            grad_out.insert(grad_out.end(), d.wx.data(), d.wx.data() + d.wx.size());
            grad_out.insert(grad_out.end(), d.wh.data(), d.wh.data() + d.wh.size());
            grad_out.insert(grad_out.end(), d.b.data(), d.b.data() + d.b.size());
        }
    grad_out.insert(grad_out.end(), dhead_w.data(), dhead_w.data() + dhead_w.size());
    grad_out.push_back(dhead_b);
    return loss;
}

/// Trains the BiLSTM on whole windows with mini-batch Adam (or plain SGD)
/// over the RMSE loss. Deterministic for a fixed config seed.
inline BiLstmModel lstm_train(const std::vector<SeqSample>& data, const TrainConfig& cfg,
                              BiLstmModel model, std::vector<double>* loss_history = nullptr) {
    cfg.check();
    if (data.empty()) fail(ErrorKind::EmptyData, "lstm_train without windows");
    model.check_shapes();
    const int T = static_cast<int>(data.front().y.size());
    for (const auto& s : data)
        if (static_cast<int>(s.y.size()) != T ||
            static_cast<int>(s.x.size()) != model.input_size)
            fail(ErrorKind::ShapeMismatch, "training windows must share T and channel count");

    std::vector<double> params = model.flatten();
    GradientStepper stepper(cfg.optimizer, cfg.learning_rate, params.size());
    std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, "lstm-shuffle"));
    std::mt19937_64 mask_rng(derive_seed(cfg.seed, "lstm-dropout"));

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < data.size(); start += cfg.batch_size) {
            const int B = static_cast<int>(
                std::min<std::size_t>(cfg.batch_size, data.size() - start));
            Eigen::MatrixXd x(model.input_size, static_cast<Eigen::Index>(T) * B);
            Eigen::RowVectorXd y(static_cast<Eigen::Index>(T) * B);
            for (int b = 0; b < B; ++b) {
                const auto& s = data[order[start + b]];
                for (int c = 0; c < model.input_size; ++c)
                    for (int t = 0; t < T; ++t)
                        x(c, static_cast<Eigen::Index>(t) * B + b) = s.x[c][t];
                for (int t = 0; t < T; ++t) y(static_cast<Eigen::Index>(t) * B + b) = s.y[t];
            }

            std::vector<Eigen::MatrixXd> masks;
            const bool use_dropout = cfg.dropout > 0.0 && model.num_layers > 1;
            if (use_dropout) {
                std::bernoulli_distribution keep(1.0 - cfg.dropout);
                const double scale = 1.0 / (1.0 - cfg.dropout);
                for (int l = 0; l + 1 < model.num_layers; ++l) {
                    Eigen::MatrixXd mask(2 * model.hidden_size, static_cast<Eigen::Index>(T) * B);
                    for (Eigen::Index cidx = 0; cidx < mask.cols(); ++cidx)
                        for (Eigen::Index r = 0; r < mask.rows(); ++r)
                            mask(r, cidx) = keep(mask_rng) ? scale : 0.0;
                    masks.push_back(std::move(mask));
                }
            }

            std::vector<double> grads;
            const double loss =
                lstm_loss_grad(model, x, y, T, B, use_dropout ? &masks : nullptr, grads);
            if (!std::isfinite(loss))
                fail(ErrorKind::DivergenceDetected, "lstm loss is not finite");
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

}  // namespace gaitforce
