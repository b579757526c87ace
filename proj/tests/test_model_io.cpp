#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "gaitforce/model_io.hpp"
#include "gaitforce/window_io.hpp"

using namespace gaitforce;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("gaitforce_model_io_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::vector<std::vector<double>> probe_window(int channels, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<std::vector<double>> x(channels, std::vector<double>(kWindowSamples));
    for (auto& ch : x)
        for (auto& v : ch) v = dist(rng);
    return x;
}

void corrupt_byte(const fs::path& p, std::size_t offset) {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(static_cast<std::streamoff>(offset));
    char c = 0;
    f.read(&c, 1);
    c ^= 0x5a;
    f.seekp(static_cast<std::streamoff>(offset));
    f.write(&c, 1);
}

}  // namespace

TEST_CASE("all three model kinds round-trip with bit-identical predictions") {
    TempDir tmp;
    const auto manifest = ChannelManifest::standard(FeatureSet::T2);
    MinMaxScaler scaler;
    scaler.per_channel = {{0.0, 1.0}, {-3.5, 2.25}, {10.0, 110.0}, {0.1, 0.9}};

    SUBCASE("mlp") {
        SavedModel sm;
        sm.kind = ModelKind::Mlp;
        sm.manifest = manifest;
        sm.scaler = scaler;
        sm.hyperparams = "epochs=5\n";
        sm.model = MlpModel::standard(4, 17);
        const auto probe = probe_window(4, 1);
        const auto before = sm.predict_window(probe);
        save_model(tmp.path / "m.gfm", sm);
        const auto loaded = load_model(tmp.path / "m.gfm");
        CHECK(loaded.kind == ModelKind::Mlp);
        CHECK(loaded.manifest == manifest);
        CHECK(loaded.hyperparams == sm.hyperparams);
        CHECK(loaded.scaler.per_channel == scaler.per_channel);
        CHECK(loaded.predict_window(probe) == before);
    }

    SUBCASE("forest") {
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<std::vector<double>> x;
        std::vector<double> y;
        for (int i = 0; i < 30; ++i) {
            x.push_back({dist(rng), dist(rng), dist(rng), dist(rng)});
            y.push_back(dist(rng));
        }
        ForestConfig fc;
        fc.n_trees = 7;
        SavedModel sm;
        sm.kind = ModelKind::Forest;
        sm.manifest = manifest;
        sm.scaler = scaler;
        sm.model = forest_train(x, y, fc);
        const auto probe = probe_window(4, 3);
        const auto before = sm.predict_window(probe);
        save_model(tmp.path / "f.gfm", sm);
        const auto loaded = load_model(tmp.path / "f.gfm");
        CHECK(loaded.predict_window(probe) == before);
        CHECK(loaded.forest().config.n_trees == 7);
    }

    SUBCASE("lstm") {
        SavedModel sm;
        sm.kind = ModelKind::Lstm;
        sm.manifest = manifest;
        sm.scaler = scaler;
        sm.model = BiLstmModel::custom(4, 2, 6, 23);
        const auto probe = probe_window(4, 5);
        const auto before = sm.predict_window(probe);
        save_model(tmp.path / "l.gfm", sm);
        const auto loaded = load_model(tmp.path / "l.gfm");
        CHECK(loaded.predict_window(probe) == before);
        CHECK(loaded.lstm().num_layers == 2);
        CHECK(loaded.lstm().hidden_size == 6);
    }
}

TEST_CASE("truncated model files raise CorruptFile") {
    TempDir tmp;
    SavedModel sm;
    sm.kind = ModelKind::Mlp;
    sm.manifest = ChannelManifest::standard(FeatureSet::T2);
    sm.scaler.per_channel.assign(4, {0.0, 1.0});
    sm.model = MlpModel::standard(4, 31);
    const auto path = tmp.path / "m.gfm";
    save_model(path, sm);

    const auto full = read_text_file(path);
    write_text_file(tmp.path / "short.gfm", full.substr(0, full.size() / 2));
    CHECK_THROWS_WITH_AS(load_model(tmp.path / "short.gfm"), doctest::Contains("CorruptFile"),
                         Error);
}

TEST_CASE("a bumped version byte raises VersionMismatch before the checksum") {
    TempDir tmp;
    SavedModel sm;
    sm.kind = ModelKind::Mlp;
    sm.manifest = ChannelManifest::standard(FeatureSet::T2);
    sm.scaler.per_channel.assign(4, {0.0, 1.0});
    sm.model = MlpModel::standard(4, 32);
    const auto path = tmp.path / "m.gfm";
    save_model(path, sm);
    corrupt_byte(path, 4);  // low byte of the version field
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("VersionMismatch"), Error);
}

TEST_CASE("a flipped payload byte fails the checksum") {
    TempDir tmp;
    SavedModel sm;
    sm.kind = ModelKind::Mlp;
    sm.manifest = ChannelManifest::standard(FeatureSet::T2);
    sm.scaler.per_channel.assign(4, {0.0, 1.0});
    sm.model = MlpModel::standard(4, 33);
    const auto path = tmp.path / "m.gfm";
    save_model(path, sm);
    corrupt_byte(path, 60);
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("CorruptFile"), Error);
}

TEST_CASE("window containers round-trip and validate") {
    TempDir tmp;
    WindowSet set;
    set.manifest = ChannelManifest::standard(FeatureSet::T2);
    set.normalized = false;
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> dist(0.0, 2.0);
    for (int k = 0; k < 3; ++k) {
        GaitCycleWindow w;
        w.subject_id = k == 2 ? "S02" : "S01";
        w.speed_mps = 1.0;
        w.foot = k % 2 == 0 ? FootSide::Left : FootSide::Right;
        w.cycle_index = k;
        w.valid_length = 120 + static_cast<std::size_t>(10 * k);
        w.x.assign(4, std::vector<double>(kWindowSamples));
        w.y.assign(kWindowSamples, 0.0);
        for (auto& ch : w.x)
            for (auto& v : ch) v = dist(rng);
        for (std::size_t i = 0; i < w.valid_length; ++i) w.y[i] = dist(rng);
        set.windows.push_back(std::move(w));
    }
    const auto path = tmp.path / "w.gfw";
    save_windows(path, set);
    const auto loaded = load_windows(path);
    CHECK(loaded.manifest == set.manifest);
    CHECK(loaded.normalized == set.normalized);
    REQUIRE(loaded.windows.size() == set.windows.size());
    for (std::size_t k = 0; k < set.windows.size(); ++k) {
        CHECK(loaded.windows[k].subject_id == set.windows[k].subject_id);
        CHECK(loaded.windows[k].valid_length == set.windows[k].valid_length);
        CHECK(loaded.windows[k].foot == set.windows[k].foot);
        // float32 storage: values match to single precision
        for (std::size_t c = 0; c < 4; ++c)
            for (std::size_t i = 0; i < 200; ++i)
                CHECK(loaded.windows[k].x[c][i] ==
                      static_cast<double>(static_cast<float>(set.windows[k].x[c][i])));
    }

    corrupt_byte(path, 80);
    CHECK_THROWS_WITH_AS(load_windows(path), doctest::Contains("CorruptFile"), Error);
}
