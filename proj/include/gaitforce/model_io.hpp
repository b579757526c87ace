#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <variant>

#include "gaitforce/forest.hpp"
#include "gaitforce/io_util.hpp"
#include "gaitforce/lstm.hpp"
#include "gaitforce/manifest.hpp"
#include "gaitforce/mlp.hpp"
#include "gaitforce/postsignal.hpp"
#include "gaitforce/preprocess.hpp"

namespace gaitforce {

// Model file format "GFM1" (byte layout in docs/FORMATS.md): header with
// kind tag, channel manifest and hyperparameter text, little-endian float64
// parameter blocks, CRC-32 trailer.
inline constexpr char kModelMagic[4] = {'G', 'F', 'M', '1'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

struct SavedModel {
    ModelKind kind = ModelKind::Mlp;
    ChannelManifest manifest = ChannelManifest::standard(FeatureSet::T3);
    std::string hyperparams;  // informative key=value lines, one per line
    MinMaxScaler scaler;      // fitted input normalization, one pair per channel
    std::variant<MlpModel, ForestModel, BiLstmModel> model;

    const MlpModel& mlp() const { return std::get<MlpModel>(model); }
    const ForestModel& forest() const { return std::get<ForestModel>(model); }
    const BiLstmModel& lstm() const { return std::get<BiLstmModel>(model); }

    /// Pointwise models take one time-step vector; the LSTM consumes whole
    /// windows. predict_window serves all three uniformly.
    std::vector<double> predict_window(const std::vector<std::vector<double>>& x) const {
        if (kind == ModelKind::Lstm) return lstm_forward(lstm(), x);
        const std::size_t T = x.front().size();
        std::vector<double> out(T);
        std::vector<double> step(x.size());
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t c = 0; c < x.size(); ++c) step[c] = x[c][t];
            out[t] = kind == ModelKind::Mlp ? mlp_forward(mlp(), step)
                                            : forest_predict(forest(), step);
        }
        return out;
    }
};

namespace detail {

inline void write_matrix(ByteWriter& w, const Eigen::MatrixXd& m) {
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    w.raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}

inline Eigen::MatrixXd read_matrix(ByteReader& r) {
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (static_cast<std::uint64_t>(rows) * cols > (1u << 28))
        fail(ErrorKind::CorruptFile, "unreasonable matrix size");
    Eigen::MatrixXd m(rows, cols);
    r.raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
    return m;
}

}  // namespace detail

inline void save_model(const std::filesystem::path& path, const SavedModel& sm) {
    ByteWriter w;
    w.raw(kModelMagic, 4);
    w.u32(kModelFormatVersion);
    w.u8(static_cast<std::uint8_t>(sm.kind));
    w.str(sm.manifest.serialize());
    w.str(sm.hyperparams);
    w.u32(static_cast<std::uint32_t>(sm.scaler.per_channel.size()));
    for (const auto& [lo, hi] : sm.scaler.per_channel) {
        w.f64(lo);
        w.f64(hi);
    }

    switch (sm.kind) {
        case ModelKind::Mlp: {
            const auto& m = sm.mlp();
            w.u32(static_cast<std::uint32_t>(m.sizes.size()));
            for (int s : m.sizes) w.u32(static_cast<std::uint32_t>(s));
            for (std::size_t l = 0; l < m.weights.size(); ++l) {
                detail::write_matrix(w, m.weights[l]);
                detail::write_matrix(w, m.biases[l]);
            }
            break;
        }
        case ModelKind::Forest: {
            const auto& f = sm.forest();
            w.u32(static_cast<std::uint32_t>(f.config.n_trees));
            w.u32(static_cast<std::uint32_t>(f.config.min_samples_leaf));
            w.u8(f.config.bootstrap ? 1 : 0);
            w.u8(f.config.aggregate == ForestAggregate::Median ? 1 : 0);
            w.u64(f.config.seed);
            w.u32(static_cast<std::uint32_t>(f.trees.size()));
            for (const auto& tree : f.trees) {
                w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
                for (const auto& n : tree.nodes) {
                    w.u32(static_cast<std::uint32_t>(n.feature + 1));  // 0 marks a leaf
                    w.f64(n.threshold);
                    w.u32(n.left);
                    w.u32(n.right);
                    w.f64(n.value);
                }
            }
            break;
        }
        case ModelKind::Lstm: {
            const auto& m = sm.lstm();
            w.u32(static_cast<std::uint32_t>(m.input_size));
            w.u32(static_cast<std::uint32_t>(m.hidden_size));
            w.u32(static_cast<std::uint32_t>(m.num_layers));
            w.f64(m.dropout);
            for (const auto& layer : m.layers)
                for (const auto& d : layer.dir) {
                    detail::write_matrix(w, d.wx);
                    detail::write_matrix(w, d.wh);
                    detail::write_matrix(w, d.b);
                }
            detail::write_matrix(w, m.head_w.transpose());
            w.f64(m.head_b);
            break;
        }
    }
    w.finish_to_file(path);
}

inline SavedModel load_model(const std::filesystem::path& path) {
    ByteReader r(path);
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, kModelMagic, 4) != 0)
        fail(ErrorKind::CorruptFile, path.string() + " is not a model file");
    const std::uint32_t version = r.u32();
    if (version != kModelFormatVersion)
        fail(ErrorKind::VersionMismatch,
             strfmt("model format version %u, expected %u", version, kModelFormatVersion));
    r.check_crc();

    SavedModel sm;
    const std::uint8_t kind = r.u8();
    if (kind > 2) fail(ErrorKind::CorruptFile, "unknown model kind tag");
    sm.kind = static_cast<ModelKind>(kind);
    sm.manifest = ChannelManifest::parse(r.str());
    sm.hyperparams = r.str();
    const std::uint32_t n_scaler = r.u32();
    sm.scaler.per_channel.resize(n_scaler);
    for (auto& [lo, hi] : sm.scaler.per_channel) {
        lo = r.f64();
        hi = r.f64();
    }

    switch (sm.kind) {
        case ModelKind::Mlp: {
            MlpModel m;
            const std::uint32_t n_sizes = r.u32();
            for (std::uint32_t i = 0; i < n_sizes; ++i) m.sizes.push_back(static_cast<int>(r.u32()));
            for (std::uint32_t l = 0; l + 1 < n_sizes; ++l) {
                m.weights.push_back(detail::read_matrix(r));
                m.biases.push_back(detail::read_matrix(r));
            }
            sm.model = std::move(m);
            break;
        }
        case ModelKind::Forest: {
            ForestModel f;
            f.config.n_trees = static_cast<int>(r.u32());
            f.config.min_samples_leaf = static_cast<int>(r.u32());
            f.config.bootstrap = r.u8() != 0;
            f.config.aggregate = r.u8() != 0 ? ForestAggregate::Median : ForestAggregate::Mean;
            f.config.seed = r.u64();
            const std::uint32_t n_trees = r.u32();
            f.trees.resize(n_trees);
            for (auto& tree : f.trees) {
                const std::uint32_t n_nodes = r.u32();
                tree.nodes.resize(n_nodes);
                for (auto& n : tree.nodes) {
                    n.feature = static_cast<int>(r.u32()) - 1;
                    n.threshold = r.f64();
                    n.left = r.u32();
                    n.right = r.u32();
                    n.value = r.f64();
                    if (n.feature >= 0 && (n.left >= n_nodes || n.right >= n_nodes))
                        fail(ErrorKind::CorruptFile, "tree child index out of range");
                }
            }
            sm.model = std::move(f);
            break;
        }
        case ModelKind::Lstm: {
            BiLstmModel m;
            m.input_size = static_cast<int>(r.u32());
            m.hidden_size = static_cast<int>(r.u32());
            m.num_layers = static_cast<int>(r.u32());
            m.dropout = r.f64();
            m.layers.resize(static_cast<std::size_t>(m.num_layers));
            for (auto& layer : m.layers)
                for (auto& d : layer.dir) {
                    d.wx = detail::read_matrix(r);
                    d.wh = detail::read_matrix(r);
                    d.b = detail::read_matrix(r);
                }
            Eigen::MatrixXd hw = detail::read_matrix(r);
            m.head_w = hw.transpose();
            m.head_b = r.f64();
            m.check_shapes();
            sm.model = std::move(m);
            break;
        }
    }
    return sm;
}

}  // namespace gaitforce
