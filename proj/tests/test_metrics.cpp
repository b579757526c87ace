#include <doctest.h>

#include <cmath>
#include <random>

#include "gaitforce/metrics.hpp"

using namespace gaitforce;

TEST_CASE("rmse: identity, hand value, homogeneity") {
    const std::vector<double> a = {1.0, 2.0, 3.0};
    CHECK(rmse(a, a) == 0.0);

    CHECK(rmse({0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));

    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> x(50), y(50), cx(50), cy(50);
    const double c = 2.75;
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = g(rng);
        y[i] = g(rng);
        cx[i] = c * x[i];
        cy[i] = c * y[i];
    }
    CHECK(rmse(cx, cy) == doctest::Approx(c * rmse(x, y)).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(rmse({1.0}, {1.0, 2.0}), doctest::Contains("LengthMismatch"), Error);
    CHECK_THROWS_WITH_AS(rmse({}, {}), doctest::Contains("Empty"), Error);
}

TEST_CASE("nrmse: identity, definitional arithmetic, zero range") {
    const std::vector<double> ref = {0.0, 1.0, 2.0};  // range 2 BW
    CHECK(nrmse_percent(ref, ref) == 0.0);

    // est chosen so rmse = 0.1 exactly: constant offset 0.1
    const std::vector<double> est = {0.1, 1.1, 2.1};
    CHECK(nrmse_percent(ref, est) == doctest::Approx(5.0).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(nrmse_percent({1.0, 1.0}, {1.0, 2.0}), doctest::Contains("ZeroRange"),
                         Error);
}

TEST_CASE("pearson_r: extremes and a direct-formula oracle") {
    std::vector<double> x = {0.0, 1.0, 2.0, 5.0};
    CHECK(pearson_r(x, x) == doctest::Approx(1.0).epsilon(1e-15));
    std::vector<double> neg(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) neg[i] = -x[i];
    CHECK(pearson_r(x, neg) == doctest::Approx(-1.0).epsilon(1e-15));

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(64), b(64);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = dist(rng);
            b[i] = 0.4 * a[i] + dist(rng);
        }
        // moment-form oracle: (E[xy]-E[x]E[y]) / sqrt((E[x^2]-E[x]^2)(E[y^2]-E[y]^2))
        const double n = static_cast<double>(a.size());
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            sx += a[i];
            sy += b[i];
            sxx += a[i] * a[i];
            syy += b[i] * b[i];
            sxy += a[i] * b[i];
        }
        const double oracle = (sxy / n - sx / n * (sy / n)) /
                              std::sqrt((sxx / n - sx / n * (sx / n)) *
                                        (syy / n - sy / n * (sy / n)));
        CHECK(pearson_r(a, b) == doctest::Approx(oracle).epsilon(1e-12));
    }

    CHECK_THROWS_WITH_AS(pearson_r({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}),
                         doctest::Contains("ConstantSeries"), Error);
}
