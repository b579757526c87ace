#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gaitforce/io_util.hpp"
#include "gaitforce/orientation.hpp"
#include "gaitforce/types.hpp"

namespace gaitforce {

// The generator is a test oracle, not a biomechanical simulator: every
// event, centroid and peak it emits is known in closed form, and all gait
// timing is quantized to the sensor grids (20 ms insole, 10 ms treadmill) so
// planted peaks land exactly on samples.

struct PeakPlan {
    double value_bw = 0.0;
    double offset_s = 0.0;  // from cycle start, multiple of 10 ms
};

struct SubjectProfile {
    std::string id;
    double body_weight_n = 0.0;
    std::array<double, 3> cycle_s{};        // per speed, multiples of 20 ms
    std::array<double, 3> stance_s{};       // per speed, multiples of 20 ms
    std::array<PeakPlan, 3> wap{};          // per speed
    std::array<PeakPlan, 3> pop{};
    // foot-rocker trajectory parameters (rad)
    double pitch_amp1 = 0.25, pitch_amp2 = 0.10, roll_amp = 0.06, roll_phase = 0.0;
    // pressed-ellipse sweep (mm)
    double sweep_rx = 34.0, sweep_ry = 21.0, sway_mm = 2.0;
    double sweep_x0 = 43.0, sweep_x1 = 196.0;
    std::uint64_t noise_seed = 0;

    double stance_frac(int speed_idx) const { return stance_s[speed_idx] / cycle_s[speed_idx]; }

    void check() const {
        for (int i = 0; i < 3; ++i) {
            const double frac = stance_frac(i);
            if (!(frac > 0.5 && frac < 0.75))
                fail(ErrorKind::ConfigError, strfmt("stance fraction %.3f outside (0.5, 0.75)", frac));
            if (!(wap[i].value_bw >= 1.0 && wap[i].value_bw <= 1.3) ||
                !(pop[i].value_bw >= 1.0 && pop[i].value_bw <= 1.3))
                fail(ErrorKind::ConfigError, "peak magnitudes outside [1.0, 1.3] BW");
            if (!(wap[i].offset_s < pop[i].offset_s))
                fail(ErrorKind::ConfigError, "WAP must precede POP");
        }
        if (!(body_weight_n > 0.0)) fail(ErrorKind::ConfigError, "body weight must be positive");
    }
};

struct CycleTruth {
    double start_s = 0.0, end_s = 0.0;                // treadmill timebase
    double stance_start_s = 0.0, stance_end_s = 0.0;
    double wap_bw = 0.0, wap_time_s = 0.0;
    double pop_bw = 0.0, pop_time_s = 0.0;

    double wap_phase() const { return (wap_time_s - start_s) / (end_s - start_s); }
    double pop_phase() const { return (pop_time_s - start_s) / (end_s - start_s); }
};

struct CopsTruth {
    std::size_t frame = 0;  // insole frame index
    double x_mm = 0.0, y_mm = 0.0;
    bool in_stance = false;
};

struct TrialGroundTruth {
    double clock_skew_s = 0.0;  // insole timestamp = true time + skew
    PerFoot<std::vector<double>> contacts;  // true contact times, treadmill timebase
    PerFoot<std::vector<CycleTruth>> cycles;
    PerFoot<std::vector<CopsTruth>> cops;
};

struct SynthOptions {
    double duration_s = 90.0;
    double accel_noise = 0.05;  // m/s^2
    double gyro_noise = 0.01;   // rad/s
    double pressure_noise = 0.2;  // device units, swing baseline cap
    double pressed_value = 50.0;
};

namespace detail {

inline double quantize(double v, double grid) { return std::round(v / grid) * grid; }

/// Raised-cosine bump: value at the peak, cosine ease on [peak - w, peak + w].
inline double bump(double t, double peak_t, double width, double amplitude) {
    const double d = std::abs(t - peak_t);
    if (d >= width) return 0.0;
    return 0.5 * amplitude * (1.0 + std::cos(M_PI * d / width));
}

/// All gait timing in integer ticks of a base clock (100 Hz) so that stance
/// membership at sample boundaries is exact; every duration is a multiple of
/// the insole tick (20 ms), so both sensor grids divide evenly.
struct GaitTiming {
    long t0_ticks = 50;      // first contact, 100 Hz ticks
    long cycle_ticks = 100;
    long stance_ticks = 60;
    double wap_off = 0.2, pop_off = 0.45;  // seconds from cycle start
    double wap_bw = 1.1, pop_bw = 1.05;

    double t0_s() const { return static_cast<double>(t0_ticks) / 100.0; }
    double cycle_s() const { return static_cast<double>(cycle_ticks) / 100.0; }
    double stance_s() const { return static_cast<double>(stance_ticks) / 100.0; }

    /// Phase ticks into the cycle at base tick j (well defined before t0 too).
    long phase_ticks(long j) const {
        return ((j - t0_ticks) % cycle_ticks + cycle_ticks) % cycle_ticks;
    }

    bool in_stance(long j) const {
        return j >= t0_ticks && phase_ticks(j) < stance_ticks;
    }

    /// BW vGRF at base tick j; exactly 0 in swing and before t0. The two bump
    /// widths are chosen so each bump vanishes at the other's peak and the
    /// force rises from the contact instant.
    double vgrf_bw(long j) const {
        if (!in_stance(j)) return 0.0;
        const double phase = static_cast<double>(phase_ticks(j)) / 100.0;
        const double stance = stance_s();
        const double w1 = wap_off;
        const double w2 = std::min(stance - pop_off, pop_off - wap_off);
        return bump(phase, wap_off, w1, wap_bw) + bump(phase, pop_off, w2, pop_bw);
    }

    /// Cycle phase in [0, 1), continuous before the first contact as well.
    double phase01(long j) const {
        return static_cast<double>(phase_ticks(j)) / static_cast<double>(cycle_ticks);
    }
};

}  // namespace detail

inline SubjectProfile make_profile(int subject_index, std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, 0x50524f46ull + static_cast<std::uint64_t>(subject_index)));
    auto uni = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    SubjectProfile p;
    p.id = strfmt("S%02d", subject_index + 1);
    // Index-salted base keeps any two subjects distinct regardless of jitter.
    p.body_weight_n = 660.0 + 18.0 * subject_index + uni(0.0, 10.0);

    const double base_cycle[3] = {1.32, 1.16, 1.00};
    const double cycle_jitter = detail::quantize(uni(-0.06, 0.06), 0.02);
    for (int s = 0; s < 3; ++s) {
        p.cycle_s[s] = detail::quantize(base_cycle[s] + cycle_jitter, 0.02);
        const double frac_target = uni(0.60, 0.66);
        p.stance_s[s] = detail::quantize(frac_target * p.cycle_s[s], 0.02);

        const double wap_bw = uni(1.05, 1.25);
        const double pop_bw = std::clamp(wap_bw + uni(-0.08, 0.05), 1.0, 1.3);
        p.wap[s] = {wap_bw, detail::quantize(0.36 * p.stance_s[s], 0.01)};
        p.pop[s] = {pop_bw, detail::quantize(0.78 * p.stance_s[s], 0.01)};
    }

    p.pitch_amp1 = uni(0.20, 0.30);
    p.pitch_amp2 = uni(0.06, 0.12);
    p.roll_amp = uni(0.03, 0.08);
    p.roll_phase = uni(0.0, 2.0 * M_PI);
    p.sweep_rx = uni(32.0, 36.0);
    p.sweep_ry = uni(19.5, 21.5);
    p.sway_mm = uni(1.0, 2.0);
    p.sweep_x0 = p.sweep_rx + 9.0;
    p.sweep_x1 = 230.0 - p.sweep_rx;
    p.noise_seed = derive_seed(seed, 0x4e4f4953ull + static_cast<std::uint64_t>(subject_index));
    p.check();
    return p;
}

/// One 90 s trial with full ground truth. Quantized timing means every
/// planted contact lands on an insole frame and every planted peak on a
/// treadmill sample.
inline std::pair<TrialRecord, TrialGroundTruth> generate_trial(const SubjectProfile& profile,
                                                               int speed_idx,
                                                               const SensorArrayLayout& layout,
                                                               std::uint64_t seed,
                                                               const SynthOptions& opt = {}) {
    if (opt.duration_s > 600.0) fail(ErrorKind::ConfigError, "trial duration above 600 s");
    profile.check();

    TrialRecord trial;
    TrialGroundTruth truth;
    trial.subject_id = profile.id;
    trial.speed_mps = kSpeedsMps[speed_idx];
    trial.body_weight_n = profile.body_weight_n;

    std::mt19937_64 rng(derive_seed(derive_seed(profile.noise_seed, seed),
                                    0x54524cull + static_cast<std::uint64_t>(speed_idx)));
    auto uni = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Per-trial clock skew between insole and treadmill, on the insole grid.
    const int skew_ticks = static_cast<int>(std::floor(uni(-3.0, 4.0)));
    truth.clock_skew_s = 0.02 * std::clamp(skew_ticks, -3, 3);

    PerFoot<detail::GaitTiming> timing;
    for (FootSide foot : kBothFeet) {
        detail::GaitTiming g;
        g.cycle_ticks = std::lround(profile.cycle_s[speed_idx] * 100.0);
        g.stance_ticks = std::lround(profile.stance_s[speed_idx] * 100.0);
        g.wap_off = profile.wap[speed_idx].offset_s;
        g.pop_off = profile.pop[speed_idx].offset_s;
        g.wap_bw = profile.wap[speed_idx].value_bw;
        g.pop_bw = profile.pop[speed_idx].value_bw;
        // feet half a cycle apart, both on the 20 ms insole grid
        g.t0_ticks = foot == FootSide::Left ? 50 : 50 + (g.cycle_ticks / 2 + 1) / 2 * 2;
        timing[foot] = g;
    }

    // Reference vGRF, 100 Hz, newtons, clean.
    const long duration_ticks = std::lround(opt.duration_s * 100.0);
    const std::size_t n_ref = static_cast<std::size_t>(duration_ticks);
    for (FootSide foot : kBothFeet) {
        auto& stream = trial.vgrf[foot];
        stream.resize(n_ref);
        for (std::size_t j = 0; j < n_ref; ++j) {
            const double t = static_cast<double>(j) / kReferenceRateHz;
            stream[j] = {t, profile.body_weight_n * timing[foot].vgrf_bw(static_cast<long>(j))};
        }
        // Contacts whose stance completes within the trial; cycle truth rows
        // only for fully recorded cycles.
        const auto& g = timing[foot];
        for (long tick = g.t0_ticks; tick + g.stance_ticks <= duration_ticks;
             tick += g.cycle_ticks) {
            const double tc = static_cast<double>(tick) / 100.0;
            truth.contacts[foot].push_back(tc);
            if (tick + g.cycle_ticks <= duration_ticks) {
                CycleTruth c;
                c.start_s = tc;
                c.end_s = static_cast<double>(tick + g.cycle_ticks) / 100.0;
                c.stance_start_s = tc;
                c.stance_end_s = static_cast<double>(tick + g.stance_ticks) / 100.0;
                c.wap_bw = g.wap_bw;
                c.wap_time_s = tc + g.wap_off;
                c.pop_bw = g.pop_bw;
                c.pop_time_s = tc + g.pop_off;
                truth.cycles[foot].push_back(c);
            }
        }
    }

    // Insole streams, 50 Hz, timestamps carry the clock skew.
    const std::size_t n_ins = static_cast<std::size_t>(std::llround(opt.duration_s * kInsoleRateHz));
    for (FootSide foot : kBothFeet) {
        const auto& g = timing[foot];
        auto& press = trial.pressure[foot];
        auto& imu = trial.imu[foot];
        press.resize(n_ins);
        imu.resize(n_ins);
        truth.cops[foot].reserve(n_ins);

        for (std::size_t k = 0; k < n_ins; ++k) {
            const long tick = 2 * static_cast<long>(k);  // insole frame on the 100 Hz base
            const double t = static_cast<double>(k) / kInsoleRateHz;  // true time
            const double stamp = t + truth.clock_skew_s;

            // Pressure: pressed ellipse sweeping heel -> toe during stance.
            PressureFrame frame;
            frame.t = stamp;
            frame.values.resize(layout.sensor_count());
            double cx = 0.0, cy = 0.0;
            const bool stance = g.in_stance(tick);
            if (stance) {
                const double s = static_cast<double>(g.phase_ticks(tick)) /
                                 static_cast<double>(g.stance_ticks);
                const double ease = s * s * (3.0 - 2.0 * s);
                cx = profile.sweep_x0 + (profile.sweep_x1 - profile.sweep_x0) * ease;
                cy = profile.sway_mm * std::sin(2.0 * M_PI * s);
            }
            for (std::size_t i = 0; i < layout.sensor_count(); ++i) {
                bool pressed = false;
                if (stance) {
                    const double dx = (layout.coords[i][0] - cx) / profile.sweep_rx;
                    const double dy = (layout.coords[i][1] - cy) / profile.sweep_ry;
                    pressed = dx * dx + dy * dy <= 1.0;
                }
                frame.values[i] = pressed ? opt.pressed_value + uni(0.0, 2.0)
                                          : uni(0.0, opt.pressure_noise);
            }
            press[k] = std::move(frame);
            truth.cops[foot].push_back({k, cx, cy, stance});

            // IMU: foot-rocker pitch/roll riding on gravity.
            const double p01 = g.phase01(tick);
            const double two_pi = 2.0 * M_PI;
            const double theta = profile.pitch_amp1 * std::sin(two_pi * p01) +
                                 profile.pitch_amp2 * std::sin(2.0 * two_pi * p01);
            const double dtheta = (two_pi / g.cycle_s()) * (profile.pitch_amp1 * std::cos(two_pi * p01) +
                                                        2.0 * profile.pitch_amp2 *
                                                            std::cos(2.0 * two_pi * p01));
            const double phi = profile.roll_amp * std::sin(two_pi * p01 + profile.roll_phase);
            const double dphi =
                (two_pi / g.cycle_s()) * profile.roll_amp * std::cos(two_pi * p01 + profile.roll_phase);

            const Quat q = quat_from_euler(phi, theta, 0.0);
            const auto grav = q.rotate_inv({0.0, 0.0, kGravity});
            ImuSample s;
            s.t = stamp;
            s.accel = {grav[0] + opt.accel_noise * gauss(rng),
                       grav[1] + opt.accel_noise * gauss(rng),
                       grav[2] + opt.accel_noise * gauss(rng)};
            // Body rates for the Z-Y-X sequence with yaw fixed at zero.
            s.gyro = {dphi + opt.gyro_noise * gauss(rng),
                      dtheta * std::cos(phi) + opt.gyro_noise * gauss(rng),
                      -dtheta * std::sin(phi) + opt.gyro_noise * gauss(rng)};
            imu[k] = s;
        }
    }
    return {std::move(trial), std::move(truth)};
}

struct SynthDataset {
    std::vector<SubjectProfile> profiles;
    std::vector<TrialRecord> trials;        // subject-major, speed-minor
    std::vector<TrialGroundTruth> truths;
};

inline SynthDataset generate_dataset(int n_subjects, const SensorArrayLayout& layout,
                                     std::uint64_t seed, const SynthOptions& opt = {},
                                     unsigned jobs = 1) {
    SynthDataset ds;
    for (int i = 0; i < n_subjects; ++i) ds.profiles.push_back(make_profile(i, seed));
    ds.trials.resize(static_cast<std::size_t>(n_subjects) * 3);
    ds.truths.resize(ds.trials.size());
    parallel_for(ds.trials.size(), jobs, [&](std::size_t idx) {
        const int subject = static_cast<int>(idx) / 3;
        const int speed = static_cast<int>(idx) % 3;
        auto [trial, truth] = generate_trial(ds.profiles[subject], speed, layout, seed, opt);
        ds.trials[idx] = std::move(trial);
        ds.truths[idx] = std::move(truth);
    });
    return ds;
}

/// Ground-truth sidecar, one text file per trial.
inline void write_ground_truth(const std::filesystem::path& path, const TrialGroundTruth& gt) {
    std::ostringstream os;
    os << "clock_skew_s " << strfmt("%.6f", gt.clock_skew_s) << "\n";
    for (FootSide foot : kBothFeet) {
        const std::string side = to_string(foot);
        os << "[contacts " << side << "]\n";
        for (double t : gt.contacts[foot]) os << strfmt("%.6f", t) << "\n";
        os << "[cycles " << side << "]\n";
        for (const auto& c : gt.cycles[foot])
            os << strfmt("%.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f", c.start_s, c.end_s,
                         c.stance_start_s, c.stance_end_s, c.wap_bw, c.wap_time_s, c.pop_bw,
                         c.pop_time_s)
               << "\n";
        os << "[cops " << side << "]\n";
        for (const auto& c : gt.cops[foot])
            os << strfmt("%zu %.6f %.6f %d", c.frame, c.x_mm, c.y_mm, c.in_stance ? 1 : 0)
               << "\n";
    }
    write_text_file(path, os.str());
}

inline TrialGroundTruth read_ground_truth(const std::filesystem::path& path) {
    TrialGroundTruth gt;
    std::istringstream is(read_text_file(path));
    std::string line;
    std::string section;
    FootSide foot = FootSide::Left;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '[') {
            const auto toks = split_ws(line.substr(1, line.size() - 2));
            if (toks.size() != 2) fail(ErrorKind::CorruptFile, "bad ground truth section");
            section = toks[0];
            foot = foot_from_string(toks[1]);
            continue;
        }
        const auto toks = split_ws(line);
        if (section.empty()) {
            if (toks.size() == 2 && toks[0] == "clock_skew_s")
                gt.clock_skew_s = parse_double(toks[1], "clock_skew_s");
            else
                fail(ErrorKind::CorruptFile, "unknown ground truth key: " + line);
        } else if (section == "contacts") {
            gt.contacts[foot].push_back(parse_double(toks.at(0), "contact"));
        } else if (section == "cycles") {
            if (toks.size() != 8) fail(ErrorKind::CorruptFile, "cycle row needs 8 columns");
            CycleTruth c;
            c.start_s = parse_double(toks[0], "start");
            c.end_s = parse_double(toks[1], "end");
            c.stance_start_s = parse_double(toks[2], "stance_start");
            c.stance_end_s = parse_double(toks[3], "stance_end");
            c.wap_bw = parse_double(toks[4], "wap_bw");
            c.wap_time_s = parse_double(toks[5], "wap_time");
            c.pop_bw = parse_double(toks[6], "pop_bw");
            c.pop_time_s = parse_double(toks[7], "pop_time");
            gt.cycles[foot].push_back(c);
        } else if (section == "cops") {
            if (toks.size() != 4) fail(ErrorKind::CorruptFile, "cops row needs 4 columns");
            CopsTruth c;
            c.frame = static_cast<std::size_t>(parse_double(toks[0], "frame"));
            c.x_mm = parse_double(toks[1], "x_mm");
            c.y_mm = parse_double(toks[2], "y_mm");
            c.in_stance = toks[3] == "1";
            gt.cops[foot].push_back(c);
        } else {
            fail(ErrorKind::CorruptFile, "unknown ground truth section: " + section);
        }
    }
    return gt;
}

}  // namespace gaitforce
