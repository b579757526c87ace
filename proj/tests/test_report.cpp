#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "gaitforce/report.hpp"

using namespace gaitforce;
namespace fs = std::filesystem;

TEST_CASE("cycle resampling onto the %GC axis is the identity at matching lengths") {
    std::vector<double> series(kWindowSamples, 0.0);
    for (std::size_t i = 0; i < 101; ++i) series[i] = static_cast<double>(i);
    const auto r = resample_cycle_gc(series, 101);
    REQUIRE(r.size() == 101);
    for (std::size_t b = 0; b < 101; ++b) CHECK(r[b] == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("epoch band percentiles match a naive oracle to 1e-9") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(0.0, 1.5);
    std::vector<std::vector<double>> cycles;
    for (int c = 0; c < 37; ++c) {
        std::vector<double> row(101);
        for (auto& v : row) v = dist(rng);
        cycles.push_back(std::move(row));
    }
    const auto band = epoch_band(cycles);
    for (std::size_t b = 0; b < 101; ++b) {
        std::vector<double> col;
        for (const auto& c : cycles) col.push_back(c[b]);
        std::sort(col.begin(), col.end());
        auto naive = [&](double p) {
            const double pos = p / 100.0 * static_cast<double>(col.size() - 1);
            const auto lo = static_cast<std::size_t>(pos);
            const double frac = pos - static_cast<double>(lo);
            return col[lo] * (1.0 - frac) + col[std::min(lo + 1, col.size() - 1)] * frac;
        };
        CHECK(std::abs(band.median[b] - naive(50.0)) < 1e-9);
        CHECK(std::abs(band.lo[b] - naive(2.5)) < 1e-9);
        CHECK(std::abs(band.hi[b] - naive(97.5)) < 1e-9);
    }
}

TEST_CASE("empty cycle sets are rejected") {
    CHECK_THROWS_WITH_AS(epoch_band({}), doctest::Contains("MissingInputs"), Error);
}

TEST_CASE("epoch SVG files are written and non-empty") {
    EpochBand ref, est;
    for (int b = 0; b < 101; ++b) {
        const double v = 0.5 + 0.5 * std::sin(b / 16.0);
        ref.median.push_back(v);
        ref.lo.push_back(v - 0.1);
        ref.hi.push_back(v + 0.1);
        est.median.push_back(v * 0.95);
        est.lo.push_back(v * 0.95 - 0.12);
        est.hi.push_back(v * 0.95 + 0.12);
    }
    const auto path = fs::temp_directory_path() / "gaitforce_epoch_test.svg";
    write_epoch_svg(path, ref, est, "test epochs");
    const auto content = read_text_file(path);
    fs::remove(path);
    CHECK(content.size() > 500);
    CHECK(content.find("<svg") != std::string::npos);
    CHECK(content.find("polyline") != std::string::npos);
}

TEST_CASE("cycle traces round-trip through the TSV dump") {
    std::vector<CycleTrace> traces;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> dist(0.0, 1.25);
    for (int k = 0; k < 4; ++k) {
        CycleTrace t;
        t.subject = k < 2 ? "S01" : "S02";
        t.speed = kSpeedsMps[static_cast<std::size_t>(k) % 3];
        t.foot = k % 2 == 0 ? FootSide::Left : FootSide::Right;
        t.cycle_index = k;
        t.valid_length = 100 + static_cast<std::size_t>(k);
        t.ref.assign(kWindowSamples, 0.0);
        t.est.assign(kWindowSamples, 0.0);
        for (std::size_t i = 0; i < t.valid_length; ++i) {
            t.ref[i] = std::round(dist(rng) * 1e6) / 1e6;  // representable at %.6f
            t.est[i] = std::round(dist(rng) * 1e6) / 1e6;
        }
        traces.push_back(std::move(t));
    }
    const auto path = fs::temp_directory_path() / "gaitforce_traces_test.tsv";
    write_traces_tsv(path, traces);
    const auto back = read_traces_tsv(path);
    fs::remove(path);
    REQUIRE(back.size() == traces.size());
    for (std::size_t k = 0; k < traces.size(); ++k) {
        CHECK(back[k].subject == traces[k].subject);
        CHECK(back[k].valid_length == traces[k].valid_length);
        for (std::size_t i = 0; i < back[k].valid_length; ++i) {
            CHECK(back[k].ref[i] == doctest::Approx(traces[k].ref[i]).epsilon(1e-9));
            CHECK(back[k].est[i] == doctest::Approx(traces[k].est[i]).epsilon(1e-9));
        }
    }
}
