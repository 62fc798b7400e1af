#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "medint/gaussian_field.hpp"

using namespace medint;

TEST(ExponentialCovariance, RejectsBadParameters) {
    EXPECT_THROW(ExponentialCovariance(0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(ExponentialCovariance(1.0, -1.0), std::invalid_argument);
    const ExponentialCovariance c(0.5, 0.02);
    EXPECT_DOUBLE_EQ(c(0.0), 0.5);
    EXPECT_NEAR(c(0.02), 0.5 * std::exp(-1.0), 1e-15);
}

TEST(GaussianField, DegenerateVarianceIsConstant) {
    auto s = substream(1, 0);
    const auto f = sample_gaussian_field(Window::square(0.5), 0.01, 1.7, ExponentialCovariance(1e-12, 0.02), s);
    ASSERT_EQ(f.values.size(), f.nx * f.ny);
    for (const double v : f.values) {
        ASSERT_NEAR(v, 1.7, 1e-4);
    }
}

TEST(GaussianField, GridCoversWindow) {
    auto s = substream(1, 1);
    const auto w = Window::square(1.0);
    const auto f = sample_gaussian_field(w, 0.01, 0.0, ExponentialCovariance(0.5, 0.02), s);
    EXPECT_EQ(f.nx, 200u);
    EXPECT_LE(f.x(0) - 0.5 * f.spacing, w.lower(0) + 1e-12);
    EXPECT_GE(f.x(f.nx - 1) + 0.5 * f.spacing, w.upper(0) - 1e-12);
    for (const double v : f.values) {
        ASSERT_TRUE(std::isfinite(v));
    }
}

TEST(GaussianField, PixelGuard) {
    EXPECT_THROW(GaussianFieldSampler(Window::square(10.0), 1e-4, 0.0, ExponentialCovariance(0.5, 0.02)),
                 std::invalid_argument);
    EXPECT_THROW(GaussianFieldSampler(Window::square(1.0), 0.0, 0.0, ExponentialCovariance(0.5, 0.02)),
                 std::invalid_argument);
}

TEST(GaussianField, SameStreamSameField) {
    const GaussianFieldSampler sampler(Window::square(0.3), 0.01, 0.0, ExponentialCovariance(0.5, 0.02));
    auto a = substream(9, 3);
    auto b = substream(9, 3);
    EXPECT_EQ(sampler.sample(a).values, sampler.sample(b).values);
}

// Replicate-ensemble oracle: marginal mean/variance and lag correlations of
// 1000 independent fields against the target exponential covariance.
TEST(GaussianField, EnsembleMatchesExponentialCovariance) {
    const double variance = 0.5;
    const double scale = 0.02;
    const double mean = -0.3;
    const GaussianFieldSampler sampler(Window::square(0.2), 0.01, mean, ExponentialCovariance(variance, scale));
    EXPECT_EQ(sampler.clipped_eigenvalues(), 0u);
    const int reps = 1000;
    const std::size_t n = sampler.pixels_per_side();
    const std::size_t c = n / 2;

    double s1 = 0, s2 = 0;           // single pixel
    double pooled_mean = 0, pooled_var = 0;
    std::vector<double> lag_sum(5, 0.0);  // lag in pixels: 0..4, along x and y
    std::size_t lag_pairs = 0;
    for (int r = 0; r < reps; ++r) {
        auto s = substream(77, static_cast<std::uint64_t>(r));
        const auto f = sampler.sample(s);
        const double v = f.at(c, c) - mean;
        s1 += v;
        s2 += v * v;
        double fm = 0, fv = 0;
        for (const double x : f.values) {
            fm += x - mean;
            fv += (x - mean) * (x - mean);
        }
        pooled_mean += fm / static_cast<double>(f.values.size());
        pooled_var += fv / static_cast<double>(f.values.size());
        for (std::size_t iy = 0; iy < n; iy += 3) {
            for (std::size_t ix = 0; ix + 4 < n; ix += 3) {
                for (std::size_t h = 0; h <= 4; ++h) {
                    lag_sum[h] += (f.at(ix, iy) - mean) * (f.at(ix + h, iy) - mean) +
                                  (f.at(iy, ix) - mean) * (f.at(iy, ix + h) - mean);
                }
                lag_pairs += 2;
            }
        }
    }
    const double pixel_var = (s2 - s1 * s1 / reps) / (reps - 1);
    EXPECT_NEAR(pixel_var, variance, 0.07);
    EXPECT_NEAR(pooled_mean / reps, 0.0, 0.03);
    EXPECT_NEAR(pooled_var / reps, variance, 0.03);

    const double c0 = lag_sum[0] / static_cast<double>(lag_pairs);
    for (const std::size_t h : {2u, 4u}) {
        const double corr = (lag_sum[h] / static_cast<double>(lag_pairs)) / c0;
        EXPECT_NEAR(corr, std::exp(-0.01 * static_cast<double>(h) / scale), 0.05) << "lag " << h;
    }
}

// Stationarity: covariance at a fixed lag does not depend on where it is measured.
TEST(GaussianField, StationaryAcrossLocations) {
    const GaussianFieldSampler sampler(Window::square(0.2), 0.01, 0.0, ExponentialCovariance(0.5, 0.02));
    const std::size_t n = sampler.pixels_per_side();
    double corner = 0, centre = 0;
    const int reps = 2000;
    for (int r = 0; r < reps; ++r) {
        auto s = substream(5, static_cast<std::uint64_t>(r));
        const auto f = sampler.sample(s);
        corner += f.at(0, 0) * f.at(2, 0);
        centre += f.at(n / 2, n / 2) * f.at(n / 2 + 2, n / 2);
    }
    // Each mean product has sd about 0.5 * sqrt(1 + rho^2) / sqrt(reps) ~ 0.012.
    EXPECT_NEAR(corner / reps, centre / reps, 0.06);
    EXPECT_NEAR(centre / reps, 0.5 * std::exp(-1.0), 0.05);
}
