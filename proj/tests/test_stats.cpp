#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gaitforce/stats.hpp"

using namespace gaitforce;

namespace {

// Closed-form regularized incomplete beta I_x(1/2, 2) for the F(1, 4) cdf:
// B(1/2, 2) = 4/3, integral = 2 sqrt(x) - (2/3) x^(3/2).
double f_1_4_p_value(double f) {
    const double x = f / (f + 4.0);
    const double cdf = (2.0 * std::sqrt(x) - (2.0 / 3.0) * x * std::sqrt(x)) * (3.0 / 4.0);
    return 1.0 - cdf;
}

// Closed-form Student t cdf for 3 degrees of freedom.
double t3_two_sided_p(double t) {
    const double x = std::abs(t) / std::sqrt(3.0);
    const double cdf = 0.5 + (1.0 / M_PI) * (x / (1.0 + x * x) + std::atan(x));
    return 2.0 * (1.0 - cdf);
}

}  // namespace

TEST_CASE("percentile uses linear interpolation between order statistics") {
    CHECK(percentile({1, 2, 3, 4}, 50.0) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(percentile({1, 2, 3, 4}, 0.0) == 1.0);
    CHECK(percentile({1, 2, 3, 4}, 100.0) == 4.0);
    CHECK(percentile({5}, 37.0) == 5.0);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> dist(-10.0, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(41);
        for (auto& x : v) x = dist(rng);
        for (double p : {2.5, 25.0, 50.0, 97.5}) {
            std::vector<double> sorted = v;
            std::sort(sorted.begin(), sorted.end());
            const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
            const auto lo = static_cast<std::size_t>(pos);
            const double frac = pos - static_cast<double>(lo);
            const double oracle = sorted[lo] * (1.0 - frac) +
                                  sorted[std::min(lo + 1, sorted.size() - 1)] * frac;
            CHECK(percentile(v, p) == doctest::Approx(oracle).epsilon(1e-12));
        }
    }
}

TEST_CASE("two-way ANOVA matches a hand-computed balanced 2x2 table") {
    // cells (A x B), n = 2: means 2, 6, 10, 14; grand mean 8.
    // SS_A = 2*2*((4-8)^2 + (12-8)^2) = 128, SS_B = 32, SS_AB = 0, SS_E = 8.
    // df: 1, 1, 1, 4; MS_E = 2; F_A = 64, F_B = 16, F_AB = 0.
    const std::vector<std::vector<std::vector<double>>> cells = {
        {{1, 3}, {5, 7}},
        {{9, 11}, {13, 15}},
    };
    const auto r = anova_two_way(cells, "algorithm", "features");
    CHECK(r.factor_a.ss == doctest::Approx(128.0).epsilon(1e-12));
    CHECK(r.factor_b.ss == doctest::Approx(32.0).epsilon(1e-12));
    CHECK(r.interaction.ss == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.ss_error == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(r.factor_a.df == 1);
    CHECK(r.factor_b.df == 1);
    CHECK(r.interaction.df == 1);
    CHECK(r.df_error == 4);
    CHECK(r.factor_a.f == doctest::Approx(64.0).epsilon(1e-12));
    CHECK(r.factor_b.f == doctest::Approx(16.0).epsilon(1e-12));
    CHECK(r.factor_a.p == doctest::Approx(f_1_4_p_value(64.0)).epsilon(1e-9));
    CHECK(r.factor_b.p == doctest::Approx(f_1_4_p_value(16.0)).epsilon(1e-9));
}

TEST_CASE("all-equal observations report NoVariance with p = 1") {
    const std::vector<std::vector<std::vector<double>>> cells = {
        {{2, 2}, {2, 2}},
        {{2, 2}, {2, 2}},
    };
    const auto r = anova_two_way(cells);
    CHECK(r.factor_a.no_variance);
    CHECK(r.factor_a.p == 1.0);
    CHECK(r.factor_b.no_variance);
    CHECK(r.interaction.no_variance);
}

TEST_CASE("ANOVA is invariant to observation order within cells") {
    std::vector<std::vector<std::vector<double>>> cells = {
        {{1.1, 3.7, 2.2}, {5.5, 7.1, 6.0}},
        {{9.9, 11.4, 10.1}, {13.0, 15.5, 14.2}},
    };
    const auto a = anova_two_way(cells);
    for (auto& row : cells)
        for (auto& cell : row) std::reverse(cell.begin(), cell.end());
    const auto b = anova_two_way(cells);
    CHECK(a.factor_a.f == b.factor_a.f);
    CHECK(a.factor_b.p == b.factor_b.p);
    CHECK(a.interaction.ss == b.interaction.ss);
}

TEST_CASE("degenerate designs are rejected") {
    CHECK_THROWS_WITH_AS(anova_two_way({{{1, 2}}}), doctest::Contains("DegenerateDesign"), Error);
    CHECK_THROWS_WITH_AS(anova_two_way({{{1}, {2}}, {{3}, {4}}}),
                         doctest::Contains("DegenerateDesign"), Error);
    CHECK_THROWS_WITH_AS(anova_two_way({{{1, 2}, {2, 3}}, {{3, 4}, {4, 5, 6}}}),
                         doctest::Contains("DegenerateDesign"), Error);
}

TEST_CASE("paired comparisons match the closed-form t(3) p-value with Bonferroni") {
    // diffs A-B = {1, 1, 1, 2}: mean 1.25, sd 0.5, t = 1.25/(0.5/2) = 5, df 3.
    const std::vector<std::pair<std::string, std::vector<double>>> groups = {
        {"ann", {4.0, 5.0, 6.0, 9.0}},
        {"rf", {3.0, 4.0, 5.0, 7.0}},
        {"lstm", {2.0, 2.5, 3.0, 4.0}},
    };
    const auto cs = pairwise_compare(groups);
    REQUIRE(cs.size() == 3);
    const auto& ab = cs[0];
    CHECK(ab.group_a == "ann");
    CHECK(ab.group_b == "rf");
    CHECK(ab.t == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(ab.df == 3);
    CHECK(ab.p_raw == doctest::Approx(t3_two_sided_p(5.0)).epsilon(1e-9));
    CHECK(ab.p_corrected == doctest::Approx(std::min(1.0, 3.0 * ab.p_raw)).epsilon(1e-12));
}

TEST_CASE("pairwise p-values are invariant to the order of paired observations") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<double> a(10), b(10);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = dist(rng);
        b[i] = a[i] + 0.1 + 0.05 * dist(rng);
    }
    const auto before = pairwise_compare({{"x", a}, {"y", b}});
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> pa, pb;
    for (std::size_t i : perm) {
        pa.push_back(a[i]);
        pb.push_back(b[i]);
    }
    const auto after = pairwise_compare({{"x", pa}, {"y", pb}});
    CHECK(before[0].t == doctest::Approx(after[0].t).epsilon(1e-12));
    CHECK(before[0].p_raw == doctest::Approx(after[0].p_raw).epsilon(1e-12));
}
