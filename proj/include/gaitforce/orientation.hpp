#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "gaitforce/common.hpp"
#include "gaitforce/types.hpp"

namespace gaitforce {

/// Unit quaternion (w, x, y, z), Hamilton convention. Represents the rotation
/// taking sensor-frame vectors into the earth frame.
struct Quat {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

    Quat normalized() const {
        const double n = norm();
        return {w / n, x / n, y / n, z / n};
    }

    friend Quat operator*(const Quat& a, const Quat& b) {
        return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
                a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
                a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
                a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
    }

    static Quat axis_angle(double ax, double ay, double az, double angle_rad) {
        const double n = std::sqrt(ax * ax + ay * ay + az * az);
        const double h = angle_rad / 2.0;
        const double s = std::sin(h) / n;
        return {std::cos(h), ax * s, ay * s, az * s};
    }

    /// Rotates a sensor-frame vector into the earth frame.
    std::array<double, 3> rotate(const std::array<double, 3>& v) const {
        const Quat p{0.0, v[0], v[1], v[2]};
        const Quat c{w, -x, -y, -z};
        const Quat r = (*this) * p * c;
        return {r.x, r.y, r.z};
    }

    /// Earth -> sensor (inverse rotation).
    std::array<double, 3> rotate_inv(const std::array<double, 3>& v) const {
        const Quat c{w, -x, -y, -z};
        const Quat p{0.0, v[0], v[1], v[2]};
        const Quat r = c * p * (*this);
        return {r.x, r.y, r.z};
    }
};

/// Gradient-descent orientation filter (IMU variant, no magnetometer).
/// Each step integrates the gyro quaternion rate and descends the
/// gravity-alignment objective along its normalized gradient, scaled by beta.
/// Yaw is therefore relative, which is fine for learned features.
struct OrientationState {
    Quat q;
    double beta = 0.1;  // corrective gain; 0 reduces to pure gyro integration
    double dt = 1.0 / kInsoleRateHz;
};

namespace detail {

/// Gravity-alignment objective: predicted gravity direction in the sensor
/// frame minus the normalized accelerometer reading.
inline std::array<double, 3> gravity_objective(const Quat& q, const std::array<double, 3>& a_hat) {
    return {2.0 * (q.x * q.z - q.w * q.y) - a_hat[0],
            2.0 * (q.y * q.z + q.w * q.x) - a_hat[1],
            1.0 - 2.0 * (q.x * q.x + q.y * q.y) - a_hat[2]};
}

}  // namespace detail

inline OrientationState update(const OrientationState& state, const std::array<double, 3>& gyro,
                               const std::array<double, 3>& accel) {
    if (!all_finite(gyro.begin(), gyro.end()) || !all_finite(accel.begin(), accel.end()))
        fail(ErrorKind::NonFiniteInput, "orientation update");
    const Quat& q = state.q;

    // Quaternion rate from the gyro: 0.5 * q * (0, w).
    Quat qdot = q * Quat{0.0, gyro[0], gyro[1], gyro[2]};
    qdot = {0.5 * qdot.w, 0.5 * qdot.x, 0.5 * qdot.y, 0.5 * qdot.z};

    const double anorm = std::sqrt(accel[0] * accel[0] + accel[1] * accel[1] +
                                   accel[2] * accel[2]);
    if (anorm > 0.0 && state.beta > 0.0) {
        const std::array<double, 3> a_hat = {accel[0] / anorm, accel[1] / anorm,
                                             accel[2] / anorm};
        const auto f = detail::gravity_objective(q, a_hat);
        // grad = J^T f for the objective above.
        double gw = -2.0 * q.y * f[0] + 2.0 * q.x * f[1];
        double gx = 2.0 * q.z * f[0] + 2.0 * q.w * f[1] - 4.0 * q.x * f[2];
        double gy = -2.0 * q.w * f[0] + 2.0 * q.z * f[1] - 4.0 * q.y * f[2];
        double gz = 2.0 * q.x * f[0] + 2.0 * q.y * f[1];
        const double gn = std::sqrt(gw * gw + gx * gx + gy * gy + gz * gz);
        if (gn > 0.0) {
            qdot.w -= state.beta * gw / gn;
            qdot.x -= state.beta * gx / gn;
            qdot.y -= state.beta * gy / gn;
            qdot.z -= state.beta * gz / gn;
        }
    }

    OrientationState out = state;
    out.q = Quat{q.w + qdot.w * state.dt, q.x + qdot.x * state.dt, q.y + qdot.y * state.dt,
                 q.z + qdot.z * state.dt}
                .normalized();
    return out;
}

/// Intrinsic Z-Y-X Euler angles (roll, pitch, yaw), pitch in [-pi/2, pi/2].
/// The asin argument is clamped near gimbal lock.
inline std::array<double, 3> angles(const OrientationState& state) {
    const Quat& q = state.q;
    const double roll = std::atan2(2.0 * (q.w * q.x + q.y * q.z),
                                   1.0 - 2.0 * (q.x * q.x + q.y * q.y));
    double s = 2.0 * (q.w * q.y - q.x * q.z);
    s = std::clamp(s, -1.0, 1.0);
    const double pitch = std::asin(s);
    const double yaw = std::atan2(2.0 * (q.w * q.z + q.x * q.y),
                                  1.0 - 2.0 * (q.y * q.y + q.z * q.z));
    return {roll, pitch, yaw};
}

/// Quaternion for intrinsic Z-Y-X angles; inverse of angles().
inline Quat quat_from_euler(double roll, double pitch, double yaw) {
    return Quat::axis_angle(0, 0, 1, yaw) * Quat::axis_angle(0, 1, 0, pitch) *
           Quat::axis_angle(1, 0, 0, roll);
}

}  // namespace gaitforce
