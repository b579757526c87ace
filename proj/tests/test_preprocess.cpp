#include <doctest.h>

#include <cmath>
#include <random>

#include "gaitforce/preprocess.hpp"

using namespace gaitforce;

TEST_CASE("normalize_vgrf divides by body weight") {
    CHECK(normalize_vgrf({0.0, 750.0, 1500.0}, 750.0) == std::vector<double>{0.0, 1.0, 2.0});
    const auto c = normalize_vgrf(std::vector<double>(7, 680.0), 680.0);
    for (double v : c) CHECK(v == 1.0);

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> dist(0.0, 2000.0);
    std::vector<double> raw(100);
    for (auto& v : raw) v = dist(rng);
    const double bw = 712.5;
    const auto out = normalize_vgrf(raw, bw);
    for (std::size_t i = 0; i < raw.size(); ++i)
        CHECK(out[i] == doctest::Approx(raw[i] / bw).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(normalize_vgrf({1.0}, 0.0), doctest::Contains("NonPositiveBodyWeight"),
                         Error);
}

TEST_CASE("upsample_2x: midpoints, length 2n-1, originals and extrema preserved") {
    CHECK(upsample_2x({0.0, 2.0}) == std::vector<double>{0.0, 1.0, 2.0});

    const auto c = upsample_2x(std::vector<double>(5, 3.3));
    CHECK(c.size() == 9);
    for (double v : c) CHECK(v == 3.3);

    // sampled 1 Hz sinusoid at 50 Hz: interpolation error below 0.005 amplitude
    std::vector<double> sine(100);
    for (std::size_t k = 0; k < sine.size(); ++k)
        sine[k] = std::sin(2.0 * M_PI * 1.0 * static_cast<double>(k) / 50.0);
    const auto up = upsample_2x(sine);
    CHECK(up.size() == 2 * sine.size() - 1);
    double worst = 0.0;
    for (std::size_t j = 0; j < up.size(); ++j) {
        const double t = static_cast<double>(j) / 100.0;
        worst = std::max(worst, std::abs(up[j] - std::sin(2.0 * M_PI * t)));
    }
    CHECK(worst < 0.005);

    std::mt19937_64 rng(19);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> r(64);
    for (auto& v : r) v = g(rng);
    const auto ur = upsample_2x(r);
    for (std::size_t k = 0; k < r.size(); ++k) CHECK(ur[2 * k] == r[k]);
    CHECK(*std::max_element(ur.begin(), ur.end()) == *std::max_element(r.begin(), r.end()));
    CHECK(*std::min_element(ur.begin(), ur.end()) == *std::min_element(r.begin(), r.end()));

    CHECK_THROWS_WITH_AS(upsample_2x({1.0}), doctest::Contains("TooShort"), Error);
}

namespace {

std::vector<SensorStateFrame> states_with_onsets(const std::vector<std::size_t>& onsets,
                                                 std::size_t stance_frames, std::size_t total) {
    std::vector<SensorStateFrame> frames(total);
    for (std::size_t k = 0; k < total; ++k) {
        frames[k].t = 0.02 * static_cast<double>(k);
        frames[k].states.assign(4, 0);
    }
    for (std::size_t on : onsets)
        for (std::size_t k = on; k < std::min(total, on + stance_frames); ++k)
            frames[k].states.assign(4, 1);
    return frames;
}

}  // namespace

TEST_CASE("insole contact detection: silence, planted onsets, debounce") {
    CHECK(detect_heel_contacts_insole(states_with_onsets({}, 0, 100)).empty());

    const std::vector<std::size_t> onsets = {10, 70, 130};
    const auto contacts = detect_heel_contacts_insole(states_with_onsets(onsets, 30, 200));
    REQUIRE(contacts.size() == onsets.size());
    for (std::size_t i = 0; i < onsets.size(); ++i)
        CHECK(std::abs(contacts[i] - 0.02 * static_cast<double>(onsets[i])) < 0.02 + 1e-12);

    // a single-frame blip (20 ms at 50 Hz would pass 50 ms debounce only if
    // held for 3 frames; 1 frame must not fire)
    const auto blip = detect_heel_contacts_insole(states_with_onsets({50}, 1, 100));
    CHECK(blip.empty());
}

TEST_CASE("vgrf contact detection: zeros, planted onsets, boundary hovering") {
    std::vector<ForceSample> zeros(100);
    for (std::size_t k = 0; k < zeros.size(); ++k) zeros[k] = {0.01 * static_cast<double>(k), 0.0};
    CHECK(detect_heel_contacts_vgrf(zeros).empty());

    std::vector<ForceSample> s(400);
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double t = 0.01 * static_cast<double>(k);
        double v = 0.0;
        for (double onset : {0.5, 1.7, 2.9})
            if (t >= onset && t < onset + 0.6) v = 0.8;
        s[k] = {t, v};
    }
    const auto contacts = detect_heel_contacts_vgrf(s);
    REQUIRE(contacts.size() == 3);
    CHECK(std::abs(contacts[0] - 0.5) < 0.011);
    CHECK(std::abs(contacts[1] - 1.7) < 0.011);
    CHECK(std::abs(contacts[2] - 2.9) < 0.011);

    std::vector<ForceSample> hover(100);
    for (std::size_t k = 0; k < hover.size(); ++k)
        hover[k] = {0.01 * static_cast<double>(k), 0.05};
    CHECK(detect_heel_contacts_vgrf(hover).empty());
}

TEST_CASE("synchronize: identity, planted shift, dropped events, shift equivariance") {
    std::vector<double> tread;
    for (int k = 0; k < 20; ++k) tread.push_back(1.0 + 1.1 * k);

    CHECK(synchronize(tread, tread) == doctest::Approx(0.0).epsilon(1e-15));

    std::vector<double> insole;
    for (double t : tread) insole.push_back(t + 0.37);
    CHECK(synchronize(insole, tread) == doctest::Approx(0.37).epsilon(1e-12));

    std::vector<double> sparse;
    for (std::size_t k = 0; k < insole.size(); ++k)
        if (k % 3 != 2) sparse.push_back(insole[k]);
    CHECK(synchronize(sparse, tread) == doctest::Approx(0.37).epsilon(1e-2 / 10.0));

    // shifting all insole timestamps by delta moves the offset by exactly delta
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> jitter(-0.005, 0.005);
    std::vector<double> noisy;
    for (double t : tread) noisy.push_back(t + 0.2 + jitter(rng));
    const double base = synchronize(noisy, tread);
    const double delta = 0.123456789;
    std::vector<double> shifted;
    for (double t : noisy) shifted.push_back(t + delta);
    CHECK(synchronize(shifted, tread) == doctest::Approx(base + delta).epsilon(1e-9));

    CHECK_THROWS_WITH_AS(synchronize({1.0, 2.0}, tread), doctest::Contains("InsufficientEvents"),
                         Error);

    // alternating +-60 ms disagreement cannot be aligned within 30 ms RMS
    std::vector<double> wobble;
    for (std::size_t k = 0; k < tread.size(); ++k)
        wobble.push_back(tread[k] + (k % 2 == 0 ? 0.06 : -0.06));
    CHECK_THROWS_WITH_AS(synchronize(wobble, tread), doctest::Contains("PoorAlignment"), Error);
}

namespace {

ProcessedTrial make_processed(std::vector<double> contacts_left, std::size_t n = 700) {
    ProcessedTrial pt;
    pt.subject_id = "S01";
    pt.speed_mps = 1.0;
    pt.body_weight_n = 700.0;
    pt.t0 = 0.0;
    pt.dt = 0.01;
    pt.n = n;
    pt.manifest = ChannelManifest::standard(FeatureSet::T3);
    pt.channels.assign(22, std::vector<double>(n));
    for (std::size_t c = 0; c < 22; ++c)
        for (std::size_t i = 0; i < n; ++i)
            pt.channels[c][i] = static_cast<double>(c) + 0.001 * static_cast<double>(i);
    pt.vgrf_bw.left.assign(n, 0.0);
    pt.vgrf_bw.right.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        pt.vgrf_bw.left[i] = 0.5 + 0.5 * std::sin(0.05 * static_cast<double>(i));
    pt.events.heel_contacts.left = std::move(contacts_left);
    return pt;
}

}  // namespace

TEST_CASE("segment_cycles: 1.1 s cycle gives valid_length 110 with held padding") {
    PreprocessOptions opt;
    const auto pt = make_processed({2.0, 3.1, 4.2});
    std::vector<Finding> excl;
    const auto windows = segment_cycles(pt, opt, &excl);
    CHECK(excl.empty());
    REQUIRE(windows.size() == 2);
    const auto& w = windows[0];
    CHECK(w.valid_length == 110);
    CHECK(w.foot == FootSide::Left);
    for (std::size_t c = 0; c < w.x.size(); ++c) {
        // in-cycle samples come from the grid, padding holds the last value
        CHECK(w.x[c][0] == pt.channels[c][200]);
        CHECK(w.x[c][109] == pt.channels[c][309]);
        for (std::size_t i = 110; i < 200; ++i) CHECK(w.x[c][i] == w.x[c][109]);
    }
    for (std::size_t i = 0; i < 110; ++i) CHECK(w.y[i] == pt.vgrf_bw.left[200 + i]);
    for (std::size_t i = 110; i < 200; ++i) CHECK(w.y[i] == 0.0);

    // adjacent windows share the boundary contact exactly once
    CHECK(windows[1].x[0][0] == pt.channels[0][310]);
}

TEST_CASE("segment_cycles excludes cycles above 2 s with a logged finding") {
    PreprocessOptions opt;
    const auto pt = make_processed({2.0, 4.3, 5.4});
    std::vector<Finding> excl;
    const auto windows = segment_cycles(pt, opt, &excl);
    REQUIRE(excl.size() == 1);
    CHECK(excl[0].code == "cycle_too_long");
    CHECK(excl[0].t_begin == doctest::Approx(2.0));
    CHECK(excl[0].t_end == doctest::Approx(4.3));
    REQUIRE(windows.size() == 1);
    CHECK(windows[0].valid_length == 110);
}

TEST_CASE("segment_cycles skips cycles before the settle period and honors the cap") {
    PreprocessOptions opt;
    const auto pt = make_processed({0.5, 1.2, 2.0, 3.0, 4.0, 5.0});
    std::vector<Finding> excl;
    const auto all = segment_cycles(pt, opt, &excl);
    CHECK(all.size() == 3);  // cycles starting at 2.0, 3.0, 4.0

    PreprocessOptions capped = opt;
    capped.max_cycles_per_foot = 2;
    CHECK(segment_cycles(pt, capped, nullptr).size() == 2);
}

TEST_CASE("segmentation conserves in-cycle samples") {
    PreprocessOptions opt;
    const auto pt = make_processed({2.0, 3.1, 4.2, 5.3, 6.4});
    const auto windows = segment_cycles(pt, opt, nullptr);
    std::size_t total = 0;
    for (const auto& w : windows) total += w.valid_length;
    // span between first and last used contact on the 100 Hz grid
    CHECK(total == static_cast<std::size_t>(std::llround((6.4 - 2.0) / 0.01)));
}

TEST_CASE("min-max scaling: midpoint, clamping, exact [0,1] on the training set") {
    WindowSet set;
    set.manifest = ChannelManifest::standard(FeatureSet::T2);
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> dist(-3.0, 5.0);
    for (int k = 0; k < 4; ++k) {
        GaitCycleWindow w;
        w.subject_id = "S01";
        w.valid_length = 200;
        w.x.assign(4, std::vector<double>(kWindowSamples));
        w.y.assign(kWindowSamples, 0.0);
        for (auto& ch : w.x)
            for (auto& v : ch) v = dist(rng);
        set.windows.push_back(std::move(w));
    }
    // pin channel 0 of window 0 so the span is exactly [-3, 5]
    set.windows[0].x[0][0] = -3.0;
    set.windows[0].x[0][1] = 5.0;
    set.windows[0].x[0][2] = 1.0;

    const MinMaxScaler scaler = fit_minmax(set, {0, 1, 2, 3});
    CHECK(scaler.per_channel[0].first == -3.0);
    CHECK(scaler.per_channel[0].second == 5.0);

    const auto norm0 = apply_minmax(set.windows[0], scaler);
    CHECK(norm0.x[0][2] == doctest::Approx(0.5).epsilon(1e-15));  // 1 in [-3, 5]

    // fit-then-apply on the training set: per channel min 0 and max 1 exactly
    for (std::size_t c = 0; c < 4; ++c) {
        double lo = 1e18, hi = -1e18;
        for (const auto& w : set.windows) {
            const auto n = apply_minmax(w, scaler);
            for (double v : n.x[c]) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        CHECK(lo == 0.0);
        CHECK(hi == 1.0);
    }

    // held-out values beyond the fitted range clamp to [0, 1]
    GaitCycleWindow out = set.windows[1];
    out.x[0][0] = 99.0;
    out.x[0][1] = -99.0;
    const auto norm_out = apply_minmax(out, scaler);
    CHECK(norm_out.x[0][0] == 1.0);
    CHECK(norm_out.x[0][1] == 0.0);

    // round trip on non-clamped values
    const auto inv = inverse_minmax(apply_minmax(set.windows[2], scaler), scaler);
    for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t i = 0; i < 200; ++i)
            CHECK(inv.x[c][i] == doctest::Approx(set.windows[2].x[c][i]).epsilon(1e-9));

    // degenerate channel maps to 0.5
    MinMaxScaler degen = scaler;
    degen.per_channel[1] = {2.0, 2.0};
    const auto nd = apply_minmax(set.windows[0], degen);
    for (double v : nd.x[1]) CHECK(v == 0.5);
}
