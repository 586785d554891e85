#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "panda/efficiency.hpp"
#include "panda/error.hpp"
#include "panda/rng.hpp"

using namespace panda;

namespace {

double sse(std::span<const SizePoint> pts, double a, double b) {
    double s = 0;
    for (const auto& p : pts) {
        const double r = p.y - (a * std::log(p.n) + b);
        s += r * r;
    }
    return s;
}

// Least squares by zooming grid search: no normal equations involved.
std::pair<double, double> grid_search_fit(std::span<const SizePoint> pts) {
    double a = 0, b = 0, span_a = 100, span_b = 100;
    for (int round = 0; round < 60; ++round) {
        double best = sse(pts, a, b), ba = a, bb = b;
        for (int i = -20; i <= 20; ++i) {
            for (int j = -20; j <= 20; ++j) {
                const double ca = a + span_a * i / 20.0, cb = b + span_b * j / 20.0;
                const double e = sse(pts, ca, cb);
                if (e < best) {
                    best = e;
                    ba = ca;
                    bb = cb;
                }
            }
        }
        a = ba;
        b = bb;
        span_a *= 0.5;
        span_b *= 0.5;
    }
    return {a, b};
}

RegressionFit coef(double slope, double intercept) {
    RegressionFit f;
    f.slope = slope;
    f.intercept = intercept;
    return f;
}

}  // namespace

TEST(Fit, ExactLogLinear) {
    std::vector<SizePoint> pts;
    for (double n : {10.0, 100.0, 1000.0, 2975.0}) pts.push_back({n, 2 * std::log(n) + 3});
    const auto f = fit_log_linear(pts);
    EXPECT_NEAR(f.slope, 2.0, 1e-12);
    EXPECT_NEAR(f.intercept, 3.0, 1e-12);
    EXPECT_EQ(f.r2, 1.0);
    EXPECT_NEAR(f.predict(50), 2 * std::log(50.0) + 3, 1e-12);
}

TEST(Fit, TwoPointsInterpolate) {
    const std::vector<SizePoint> pts = {{7, 13.2}, {300, 41.9}};
    const auto f = fit_log_linear(pts);
    EXPECT_EQ(f.r2, 1.0);
    EXPECT_NEAR(f.predict(7), 13.2, 1e-12);
    EXPECT_NEAR(f.predict(300), 41.9, 1e-12);
}

TEST(Fit, MatchesGridSearchOracle) {
    RngStream rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<SizePoint> pts;
        const double a = rng.uniform(-10, 10), b = rng.uniform(-20, 20);
        const int count = static_cast<int>(rng.uniform_int(3, 12));
        for (int i = 0; i < count; ++i) {
            const double n = std::exp(rng.uniform(0, 8));
            pts.push_back({n, a * std::log(n) + b + rng.uniform(-2, 2)});
        }
        const auto f = fit_log_linear(pts);
        const auto [ga, gb] = grid_search_fit(pts);
        EXPECT_NEAR(f.slope, ga, 1e-6);
        EXPECT_NEAR(f.intercept, gb, 1e-6);
        EXPECT_GE(f.r2, 0.0);
        EXPECT_LE(f.r2, 1.0);
    }
}

TEST(Fit, Errors) {
    const std::vector<SizePoint> one = {{10, 1}};
    EXPECT_THROW(fit_log_linear(one), InsufficientPoints);
    EXPECT_THROW(fit_log_linear(std::vector<SizePoint>{}), InsufficientPoints);
    const std::vector<SizePoint> same = {{10, 1}, {10, 2}, {10, 3}};
    EXPECT_THROW(fit_log_linear(same), DegenerateAbscissa);
    const std::vector<SizePoint> nonpos = {{0, 1}, {10, 2}};
    EXPECT_THROW(fit_log_linear(nonpos), DegenerateAbscissa);
}

TEST(EffectiveN, PublishedCoefficients) {
    const auto pq = coef(6.3255, 8.5413);
    EXPECT_NEAR(effective_n(pq, 59.9), 3358.7, 3358.7 * 0.005);
    EXPECT_NEAR(effective_n(pq, 58.8), 2822.6, 2822.6 * 0.005);
    const auto ap = coef(5.4384, -11.494);
    EXPECT_NEAR(effective_n(ap, 33.5), 3918.2, 3918.2 * 0.005);
}

TEST(EffectiveN, ZeroSlope) {
    EXPECT_THROW(effective_n(coef(0.0, 1.0), 3.0), ZeroSlope);
}

TEST(EffectiveN, RoundTripProperty) {
    RngStream rng(5);
    for (int i = 0; i < 10000; ++i) {
        double a = rng.uniform(-20, 20);
        if (std::abs(a) < 1e-3) a = 1.0;
        const auto f = coef(a, rng.uniform(-50, 50));
        const double n = std::exp(rng.uniform(-5, 12));
        ASSERT_NEAR(effective_n(f, f.predict(n)) / n, 1.0, 1e-9);
    }
}

TEST(DataEfficiency, Examples) {
    EXPECT_NEAR(data_efficiency(2822.6, 3358.7), 19.0, 0.05);
    EXPECT_NEAR(data_efficiency(9.8, 10.6), 8.2, 0.05);
    EXPECT_EQ(data_efficiency(123.4, 123.4), 0.0);
    EXPECT_THROW(data_efficiency(0.0, 5.0), NonpositiveBaseline);
    EXPECT_THROW(data_efficiency(-1.0, 5.0), NonpositiveBaseline);
}

TEST(DataEfficiency, ScaleInvariant) {
    RngStream rng(8);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform(0.1, 5000), b = rng.uniform(0.1, 5000), c = std::exp(rng.uniform(-10, 10));
        ASSERT_NEAR(data_efficiency(a * c, b * c), data_efficiency(a, b), 1e-9 * std::max(1.0, std::abs(data_efficiency(a, b))));
    }
}
