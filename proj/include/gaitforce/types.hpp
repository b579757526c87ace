#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gaitforce/common.hpp"

namespace gaitforce {

inline constexpr double kGravity = 9.80665;        // m/s^2
inline constexpr double kReferenceRateHz = 100.0;  // treadmill / processed grid
inline constexpr double kInsoleRateHz = 50.0;      // raw insole + IMU
inline constexpr int kWindowSamples = 200;         // 2 s at 100 Hz
inline constexpr double kSpeedsMps[3] = {0.7, 1.0, 1.4};

enum class FootSide { Left, Right };

inline const char* to_string(FootSide f) { return f == FootSide::Left ? "left" : "right"; }

inline FootSide foot_from_string(const std::string& s) {
    if (s == "left") return FootSide::Left;
    if (s == "right") return FootSide::Right;
    fail(ErrorKind::ConfigError, "unknown foot side '" + s + "'");
}

inline constexpr std::array<FootSide, 2> kBothFeet = {FootSide::Left, FootSide::Right};

template <class T>
struct PerFoot {
    T left{};
    T right{};

    T& operator[](FootSide f) { return f == FootSide::Left ? left : right; }
    const T& operator[](FootSide f) const { return f == FootSide::Left ? left : right; }
};

/// Coordinates of the pressure sensors, millimetres in the insole plane:
/// x runs anterior (heel -> toe), y runs medial-lateral around the midline.
struct SensorArrayLayout {
    std::vector<std::array<double, 2>> coords;

    std::size_t sensor_count() const { return coords.size(); }

    // [min_x, max_x, min_y, max_y]
    std::array<double, 4> bounding_box() const {
        std::array<double, 4> bb = {0, 0, 0, 0};
        if (coords.empty()) return bb;
        bb = {coords[0][0], coords[0][0], coords[0][1], coords[0][1]};
        for (const auto& c : coords) {
            bb[0] = std::min(bb[0], c[0]);
            bb[1] = std::max(bb[1], c[0]);
            bb[2] = std::min(bb[2], c[1]);
            bb[3] = std::max(bb[3], c[1]);
        }
        return bb;
    }

    void check() const {
        if (coords.empty()) fail(ErrorKind::ShapeMismatch, "layout has no sensors");
        for (std::size_t i = 0; i < coords.size(); ++i) {
            if (!std::isfinite(coords[i][0]) || !std::isfinite(coords[i][1]))
                fail(ErrorKind::NonFiniteInput, strfmt("layout coordinate %zu not finite", i));
            for (std::size_t j = i + 1; j < coords.size(); ++j)
                if (coords[i] == coords[j])
                    fail(ErrorKind::ShapeMismatch,
                         strfmt("sensors %zu and %zu share coordinates", i, j));
        }
    }

    /// The 96-sensor insole grid shipped with the repo: 16 rows along the
    /// foot axis, 6 sensors per row, row width following the insole outline
    /// (narrow heel, wide forefoot, tapered toe).
    static SensorArrayLayout insole96() {
        SensorArrayLayout layout;
        constexpr int rows = 16, cols = 6;
        constexpr double length_mm = 240.0;
        constexpr double row_pitch = length_mm / rows;  // 15 mm
        for (int r = 0; r < rows; ++r) {
            const double x = row_pitch * (r + 0.5);
            const double w = outline_width_mm(x);
            for (int c = 0; c < cols; ++c) {
                const double y = -w / 2.0 + w * (c + 0.5) / cols;
                layout.coords.push_back({x, y});
            }
        }
        return layout;
    }

    /// Insole outline half-profile: sensor row width as a function of the
    /// anterior position. Approximates a foot shape; exact values matter only
    /// in that they are fixed and shipped with the repo.
    static double outline_width_mm(double x) {
        auto lerp = [](double a, double b, double t) { return a + (b - a) * t; };
        if (x < 60.0) return 58.0;
        if (x < 120.0) return lerp(58.0, 66.0, (x - 60.0) / 60.0);
        if (x < 150.0) return lerp(66.0, 80.0, (x - 120.0) / 30.0);
        if (x < 195.0) return 80.0;
        return lerp(80.0, 62.0, (x - 195.0) / 45.0);
    }

    /// Nominal inter-sensor pitch: the larger of the row spacing and the
    /// widest in-row spacing. Used for CoPS quantization tolerances.
    double nominal_pitch_mm() const {
        std::vector<double> xs;
        for (const auto& c : coords) xs.push_back(c[0]);
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                 xs.end());
        double pitch = 0.0;
        for (std::size_t i = 1; i < xs.size(); ++i) pitch = std::max(pitch, xs[i] - xs[i - 1]);
        for (double x : xs) {
            std::vector<double> ys;
            for (const auto& c : coords)
                if (std::abs(c[0] - x) < 1e-9) ys.push_back(c[1]);
            std::sort(ys.begin(), ys.end());
            for (std::size_t i = 1; i < ys.size(); ++i) pitch = std::max(pitch, ys[i] - ys[i - 1]);
        }
        return pitch;
    }
};

struct PressureFrame {
    double t = 0.0;                // seconds
    std::vector<double> values;    // device units, one per sensor
};

struct ImuSample {
    double t = 0.0;
    std::array<double, 3> accel = {0, 0, 0};  // m/s^2
    std::array<double, 3> gyro = {0, 0, 0};   // rad/s
    std::array<double, 3> angle = {0, 0, 0};  // rad, filled by the orientation filter
    bool has_angle = false;
};

struct ForceSample {
    double t = 0.0;
    double value = 0.0;  // newtons in raw trials, BW after normalization
};

struct TrialRecord {
    std::string subject_id;
    double speed_mps = 0.0;
    double body_weight_n = 0.0;
    PerFoot<std::vector<PressureFrame>> pressure;  // 50 Hz nominal
    PerFoot<std::vector<ImuSample>> imu;           // 50 Hz nominal
    PerFoot<std::vector<ForceSample>> vgrf;        // 100 Hz, newtons
};

}  // namespace gaitforce
