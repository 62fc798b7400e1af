#include "medint/gaussian_field.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <iostream>
#include <mutex>
#include <stdexcept>

namespace medint {

namespace {

// FFTW's planner is not thread safe; execution with new arrays is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Smallest 7-smooth integer >= n.
std::size_t fft_friendly_size(std::size_t n) {
    for (std::size_t m = n;; ++m) {
        std::size_t r = m;
        for (std::size_t p : {2, 3, 5, 7}) {
            while (r % p == 0) {
                r /= p;
            }
        }
        if (r == 1) {
            return m;
        }
    }
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
        if (data == nullptr) {
            throw std::bad_alloc();
        }
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
};

// Correlation lengths kept on the torus beyond the window.
constexpr double kTorusPaddingScales = 20.0;

}  // namespace

ExponentialCovariance::ExponentialCovariance(double variance, double scale) : variance_(variance), scale_(scale) {
    if (!(variance > 0.0) || !(scale > 0.0)) {
        throw std::invalid_argument("exponential covariance needs variance > 0 and scale > 0");
    }
}

double ExponentialCovariance::operator()(double r) const { return variance_ * std::exp(-r / scale_); }

struct GaussianFieldSampler::Plan {
    fftw_plan plan = nullptr;
    ~Plan() {
        if (plan != nullptr) {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(plan);
        }
    }
};

GaussianFieldSampler::GaussianFieldSampler(const Window& window, double spacing, double mean,
                                           const ExponentialCovariance& cov)
    : spacing_(spacing), mean_(mean) {
    if (window.dim() != 2) {
        throw std::invalid_argument("Gaussian field sampling is planar only");
    }
    if (!(spacing > 0.0)) {
        throw std::invalid_argument("field spacing must be > 0");
    }
    const double cells = std::ceil(window.side() / spacing - 1e-9);
    if (cells * cells > static_cast<double>(kMaxPixels)) {
        throw std::invalid_argument("Gaussian field exceeds the pixel-count guard of 2^24 pixels");
    }
    pixels_ = static_cast<std::size_t>(cells);
    origin_ = window.lower() + 0.5 * spacing;

    const auto pad = static_cast<std::size_t>(std::ceil(kTorusPaddingScales * cov.scale() / spacing));
    torus_ = fft_friendly_size(std::max<std::size_t>(2, std::min(2 * pixels_, pixels_ + pad)));
    const std::size_t p = torus_;
    const std::size_t total = p * p;

    FftwBuffer buf(total);
    {
        std::lock_guard lock(planner_mutex());
        plan_ = std::make_unique<Plan>();
        plan_->plan = fftw_plan_dft_2d(static_cast<int>(p), static_cast<int>(p), buf.data, buf.data, FFTW_FORWARD,
                                       FFTW_ESTIMATE);
    }
    if (plan_->plan == nullptr) {
        throw std::runtime_error("FFTW planning failed");
    }

    for (std::size_t i = 0; i < p; ++i) {
        const double di = static_cast<double>(std::min(i, p - i)) * spacing;
        for (std::size_t j = 0; j < p; ++j) {
            const double dj = static_cast<double>(std::min(j, p - j)) * spacing;
            buf.data[i * p + j][0] = cov(std::hypot(di, dj));
            buf.data[i * p + j][1] = 0.0;
        }
    }
    fftw_execute_dft(plan_->plan, buf.data, buf.data);

    amplitude_.resize(total);
    double positive = 0.0;
    double negative = 0.0;
    const double norm = 1.0 / static_cast<double>(p);
    for (std::size_t k = 0; k < total; ++k) {
        const double eig = buf.data[k][0];
        if (eig < 0.0) {
            negative -= eig;
            amplitude_[k] = 0.0;
            ++clipped_;
        } else {
            positive += eig;
            amplitude_[k] = std::sqrt(eig) * norm;
        }
    }
    clipped_fraction_ = positive > 0.0 ? negative / positive : 0.0;
    if (clipped_ > 0 && clipped_fraction_ > 1e-6) {
        std::clog << "warning: circulant embedding not non-negative definite; clipped " << clipped_
                  << " eigenvalues (relative mass " << clipped_fraction_ << ")\n";
    }
}

GaussianFieldSampler::~GaussianFieldSampler() = default;

GridField GaussianFieldSampler::sample(RandomStream& stream) const {
    const std::size_t p = torus_;
    FftwBuffer buf(p * p);
    for (std::size_t k = 0; k < p * p; ++k) {
        const auto [g1, g2] = stream.normal_pair();
        buf.data[k][0] = amplitude_[k] * g1;
        buf.data[k][1] = amplitude_[k] * g2;
    }
    fftw_execute_dft(plan_->plan, buf.data, buf.data);

    GridField field;
    field.origin_x = origin_;
    field.origin_y = origin_;
    field.spacing = spacing_;
    field.nx = pixels_;
    field.ny = pixels_;
    field.clipped_eigenvalues = clipped_;
    field.clipped_fraction = clipped_fraction_;
    field.values.resize(pixels_ * pixels_);
    for (std::size_t iy = 0; iy < pixels_; ++iy) {
        for (std::size_t ix = 0; ix < pixels_; ++ix) {
            field.values[iy * pixels_ + ix] = mean_ + buf.data[iy * p + ix][0];
        }
    }
    return field;
}

GridField sample_gaussian_field(const Window& window, double spacing, double mean, const ExponentialCovariance& cov,
                                RandomStream& stream) {
    return GaussianFieldSampler(window, spacing, mean, cov).sample(stream);
}

}  // namespace medint
