#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "medint/geometry.hpp"
#include "medint/random.hpp"

namespace medint {

/// Stationary covariance c(r) = variance * exp(-r / scale).
class ExponentialCovariance {
public:
    ExponentialCovariance(double variance, double scale);

    double variance() const { return variance_; }
    double scale() const { return scale_; }
    double operator()(double r) const;

private:
    double variance_;
    double scale_;
};

/// Values on the pixel centres of a regular planar lattice.
struct GridField {
    double origin_x = 0.0;  ///< centre of pixel (0, 0)
    double origin_y = 0.0;
    double spacing = 0.0;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<double> values;  ///< row-major, index iy * nx + ix

    /// Negative embedding eigenvalues that were clipped to zero.
    std::size_t clipped_eigenvalues = 0;
    /// Sum of |clipped eigenvalues| relative to the sum of all positive ones.
    double clipped_fraction = 0.0;

    double at(std::size_t ix, std::size_t iy) const { return values[iy * nx + ix]; }
    double x(std::size_t ix) const { return origin_x + static_cast<double>(ix) * spacing; }
    double y(std::size_t iy) const { return origin_y + static_cast<double>(iy) * spacing; }
};

/// Circulant-embedding sampler for a planar Gaussian field with exponential
/// covariance. The embedding spectrum is computed once; sample() can then be
/// called concurrently from several threads with distinct streams.
class GaussianFieldSampler {
public:
    /// Maximum number of pixels in a sampled field.
    static constexpr std::size_t kMaxPixels = std::size_t{1} << 24;

    GaussianFieldSampler(const Window& window, double spacing, double mean, const ExponentialCovariance& cov);
    ~GaussianFieldSampler();
    GaussianFieldSampler(const GaussianFieldSampler&) = delete;
    GaussianFieldSampler& operator=(const GaussianFieldSampler&) = delete;

    GridField sample(RandomStream& stream) const;

    std::size_t pixels_per_side() const { return pixels_; }
    std::size_t torus_size() const { return torus_; }
    std::size_t clipped_eigenvalues() const { return clipped_; }
    double clipped_fraction() const { return clipped_fraction_; }

private:
    struct Plan;

    double origin_;
    double spacing_;
    double mean_;
    std::size_t pixels_;
    std::size_t torus_;
    std::vector<double> amplitude_;
    std::size_t clipped_ = 0;
    double clipped_fraction_ = 0.0;
    std::unique_ptr<Plan> plan_;
};

/// One-shot convenience wrapper around GaussianFieldSampler.
GridField sample_gaussian_field(const Window& window, double spacing, double mean, const ExponentialCovariance& cov,
                                RandomStream& stream);

}  // namespace medint
