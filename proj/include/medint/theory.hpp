#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "medint/estimators.hpp"
#include "medint/models.hpp"

namespace medint {

/// P(N = k) for N ~ Poisson(nu), evaluated in log space.
double poisson_pmf(long k, double nu);
/// P(N <= k) for N ~ Poisson(nu); 0 for k < 0.
double poisson_cdf(long k, double nu);
/// Smallest k with P(N <= k) >= 1/2.
long poisson_median(double nu);

/// cdf of Z = N + phi^{-1}(U), N ~ Poisson(nu), at t >= 0.
double jittered_cdf(double nu, double t, const JitterFunction& phi);
/// Density of Z at a non-integer t: P(N = floor t) phi'(t - floor t).
double jittered_density(double nu, double t, const JitterFunction& phi);

struct TheoreticalMedianReport {
    double mean = 0.0;
    long integer_median = 0;
    double jittered_median = 0.0;
    /// jittered_median - mean
    double offset = 0.0;
};

/// Exact medians of N ~ Poisson(nu) and of N + phi^{-1}(U).
TheoreticalMedianReport exact_jittered_median(double nu, const JitterFunction& phi);

struct SigmaSquared {
    enum class Method { Analytic, MonteCarlo };
    double value = 0.0;
    Method method = Method::Analytic;
    std::string model;
    /// Quadrature error estimate or standard error of the regression slope.
    double error = 0.0;
};

std::string to_string(SigmaSquared::Method method);

/// Integral of exp(c(|w|)) - 1 over the plane for c(r) = variance exp(-r / scale).
/// Throws std::runtime_error when the quadrature does not converge.
double lgcp_pair_correlation_integral(double variance, double scale, double* error = nullptr);

struct SigmaMonteCarloOptions {
    double half_side = 1.0;
    std::size_t replications = 2000;
    std::uint64_t seed = 0x5157A;
    unsigned workers = 1;
    /// Intensity used for the hard-core model (where it is not explicit);
    /// estimated from the same replications when empty.
    std::optional<double> intensity;
};

/// Asymptotic count variance sigma^2 = lambda + lambda^2 int (g - 1).
/// Analytic for Poisson, LGCP and Thomas; Monte Carlo otherwise.
SigmaSquared sigma_squared(const ModelConfig& model, const SigmaMonteCarloOptions& mc = {});

/// Slope of Var N(C) against |C| over nested centred squares (fit
/// Var = b |C| + c sqrt|C| so the boundary term does not bias b).
SigmaSquared sigma_squared_monte_carlo(const ModelConfig& model, const SigmaMonteCarloOptions& mc);

/// Percentage MSE reduction of a competitor relative to the standard estimator.
double gain(double mse_std, double mse_other);

struct MedianBiasBound {
    /// Bound on |Me_Z / c_n - lambda| from the count-variance argument.
    double intensity_bound = 0.0;
    /// 4/3 bound on |Me_Z - lambda c_n|, valid for Cox (and Poisson) models.
    std::optional<double> count_bound;
    double epsilon = 0.01;
};

MedianBiasBound median_bias_bound(double sigma2, double cell_volume, bool cox, double epsilon = 0.01);
MedianBiasBound median_bias_bound(const ModelConfig& model, double cell_volume, double epsilon = 0.01);

struct CltOptions {
    std::vector<double> half_sides{4.0};
    int cells_per_side = 5;
    std::size_t replications = 1000;
    std::uint64_t seed = 2016;
    unsigned workers = 1;
    double confidence = 0.95;
    /// Required for the hard-core model.
    std::optional<double> reference_intensity;
    /// Overrides sigma_squared(model).
    std::optional<double> sigma2;
};

struct CltDiagnostic {
    double half_side = 0.0;
    std::size_t cells = 0;
    double cell_volume = 0.0;
    double intensity = 0.0;
    double sigma2 = 0.0;
    /// Me_Z used for the empirical cdf statistic (exact for Poisson).
    double median_z = 0.0;
    bool median_exact = false;
    /// Var of sqrt(k_n) (F_hat(Me_Z) - 1/2); target 1/4.
    double ecdf_variance = 0.0;
    /// Var of |W|^{1/2} (lambda_J - lambda); target pi sigma^2 / 2.
    double scaled_variance = 0.0;
    double scaled_variance_target = 0.0;
    /// Var(lambda_J) / Var(lambda_std); target pi / 2.
    double variance_ratio = 0.0;
    /// sqrt(c_n) P(N = floor(lambda c_n)) and its limit (2 pi sigma^2)^{-1/2}.
    double scaled_pmf = 0.0;
    double scaled_pmf_target = 0.0;
    bool pmf_exact = false;
    /// Coverage of lambda_J +- z sqrt(pi sigma^2 / (2 |W|)).
    double coverage = 0.0;
    double mean_j = 0.0;
    double mean_std = 0.0;
};

std::vector<CltDiagnostic> clt_diagnostics(const ModelConfig& model, const CltOptions& options);

}  // namespace medint
