#include <doctest.h>

#include <cmath>
#include <random>

#include "gaitforce/orientation.hpp"
#include "gaitforce/types.hpp"

using namespace gaitforce;

namespace {
constexpr double kDeg = M_PI / 180.0;
}

TEST_CASE("gravity-aligned identity is a fixed point") {
    OrientationState s;
    s.dt = 0.01;
    for (int k = 0; k < 100; ++k) s = update(s, {0, 0, 0}, {0, 0, kGravity});
    CHECK(std::abs(s.q.w - 1.0) < 1e-12);
    CHECK(std::abs(s.q.x) < 1e-12);
    CHECK(std::abs(s.q.y) < 1e-12);
    CHECK(std::abs(s.q.z) < 1e-12);
}

TEST_CASE("a 10 degree static tilt is recovered within 0.5 degrees in 5 s") {
    // Body rolled +10 deg about x measures gravity (0, g sin, g cos).
    const double roll = 10.0 * kDeg;
    const std::array<double, 3> accel = {0.0, kGravity * std::sin(roll),
                                         kGravity * std::cos(roll)};
    OrientationState s;
    s.dt = 0.02;
    for (int k = 0; k < 250; ++k) s = update(s, {0, 0, 0}, accel);  // 5 s at 50 Hz
    const auto a = angles(s);
    CHECK(std::abs(a[0] - roll) < 0.5 * kDeg);
    CHECK(std::abs(a[1]) < 0.5 * kDeg);
}

TEST_CASE("beta = 0 reduces to pure gyro integration (closed form)") {
    const double omega = 0.3, dt = 0.005;
    const int n = 2000;
    OrientationState s;
    s.beta = 0.0;
    s.dt = dt;
    for (int k = 0; k < n; ++k) s = update(s, {0, 0, omega}, {0, 0, kGravity});
    const double yaw = angles(s)[2];
    CHECK(std::abs(yaw - n * omega * dt) < 1e-6);
}

TEST_CASE("euler conversion: identity and axis-aligned quarter turn") {
    OrientationState s;
    auto a = angles(s);
    CHECK(a[0] == 0.0);
    CHECK(a[1] == 0.0);
    CHECK(a[2] == 0.0);

    s.q = Quat::axis_angle(0, 0, 1, M_PI / 2.0);
    a = angles(s);
    CHECK(std::abs(a[2] - M_PI / 2.0) < 1e-12);
    CHECK(std::abs(a[0]) < 1e-12);
    CHECK(std::abs(a[1]) < 1e-12);
}

TEST_CASE("angles round-trip random unit quaternions up to sign") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        Quat q{g(rng), g(rng), g(rng), g(rng)};
        q = q.normalized();
        OrientationState s;
        s.q = q;
        const auto a = angles(s);
        const Quat back = quat_from_euler(a[0], a[1], a[2]);
        const double sign = back.w * q.w + back.x * q.x + back.y * q.y + back.z * q.z >= 0 ? 1 : -1;
        CHECK(std::abs(back.w - sign * q.w) < 1e-9);
        CHECK(std::abs(back.x - sign * q.x) < 1e-9);
        CHECK(std::abs(back.y - sign * q.y) < 1e-9);
        CHECK(std::abs(back.z - sign * q.z) < 1e-9);
    }
}

TEST_CASE("quaternion norm stays within 1e-9 of 1 over 100k random-walk updates") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    OrientationState s;
    s.dt = 0.01;
    double worst = 0.0;
    for (int k = 0; k < 100000; ++k) {
        const std::array<double, 3> gyro = {0.5 * g(rng), 0.5 * g(rng), 0.5 * g(rng)};
        const std::array<double, 3> accel = {g(rng), g(rng), kGravity + g(rng)};
        s = update(s, gyro, accel);
        worst = std::max(worst, std::abs(s.q.norm() - 1.0));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("static input converges monotonically down to the step-size floor") {
    const double roll = 25.0 * kDeg;
    const std::array<double, 3> accel = {0.0, kGravity * std::sin(roll),
                                         kGravity * std::cos(roll)};
    OrientationState s;
    s.beta = 0.05;
    s.dt = 0.01;
    auto err = [&](const OrientationState& st) {
        const double an = kGravity;
        const auto f = gaitforce::detail::gravity_objective(
            st.q, {accel[0] / an, accel[1] / an, accel[2] / an});
        return std::sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2]);
    };
    const double floor = 4.0 * s.beta * s.dt;
    double prev = err(s);
    bool reached_floor = false;
    for (int k = 0; k < 1500; ++k) {
        s = update(s, {0, 0, 0}, accel);
        const double e = err(s);
        if (k >= 10 && !reached_floor) {
            CHECK(e <= prev + 1e-12);
            reached_floor = e < floor;
        }
        prev = e;
    }
    CHECK(err(s) < 0.02);
}

TEST_CASE("zero accelerometer skips the corrective step") {
    OrientationState a, b;
    a.beta = 0.1;
    b.beta = 0.0;
    a.dt = b.dt = 0.01;
    for (int k = 0; k < 50; ++k) {
        a = update(a, {0.2, -0.1, 0.3}, {0, 0, 0});
        b = update(b, {0.2, -0.1, 0.3}, {0, 0, 0});
    }
    CHECK(a.q.w == b.q.w);
    CHECK(a.q.x == b.q.x);
    CHECK(a.q.y == b.q.y);
    CHECK(a.q.z == b.q.z);
}

TEST_CASE("non-finite input is rejected") {
    OrientationState s;
    CHECK_THROWS_WITH_AS(update(s, {std::nan(""), 0, 0}, {0, 0, kGravity}),
                         doctest::Contains("NonFiniteInput"), Error);
}
