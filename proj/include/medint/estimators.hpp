#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "medint/geometry.hpp"
#include "medint/random.hpp"

namespace medint {

enum class EstimatorId { Standard, MedianJ, MedianJ2, Voronoi };

/// std, medianJ, medianJ2, voronoi.
std::string to_string(EstimatorId id);

/// Increasing bijection phi of [0, 1] used to jitter counts as N + phi^{-1}(U).
///
/// Only the identity satisfies the regularity required by the asymptotic
/// theory; the power and square-root families are provided for exploring the
/// exact medians of the jittered variable.
class JitterFunction {
public:
    enum class Kind { Identity, Power, Sqrt };

    static JitterFunction identity() { return JitterFunction(Kind::Identity, 1.0); }
    /// phi(t) = t^exponent, exponent > 0.
    static JitterFunction power(double exponent);
    /// phi(t) = sqrt(t).
    static JitterFunction sqrt() { return JitterFunction(Kind::Sqrt, 0.5); }
    /// Parses "identity", "sqrt" or "power:<p>".
    static JitterFunction parse(const std::string& text);

    Kind kind() const { return kind_; }
    double exponent() const { return exponent_; }
    std::string name() const;

    double phi(double t) const;
    double inverse(double u) const;
    double derivative(double t) const;

    bool operator==(const JitterFunction&) const = default;

private:
    JitterFunction(Kind kind, double exponent) : kind_(kind), exponent_(exponent) {}

    Kind kind_;
    double exponent_;
};

/// Jittered counts z_k = N_k + phi^{-1}(U_k) together with the cell volume.
struct JitteredSample {
    std::vector<double> z_values;
    double cell_volume = 0.0;
};

struct EstimatorResult {
    EstimatorId id = EstimatorId::Standard;
    double value = 0.0;
    /// Number of cells k_n (median estimators).
    std::size_t cells = 0;
    /// Dummy grid points per side and trim fraction (Voronoi estimator).
    int grid_per_side = 0;
    double trim = 0.0;
    /// Stream the estimator consumed, when it is randomised.
    std::uint64_t seed = 0;
    std::uint64_t stream_index = 0;
};

/// Order statistic of rank ceil(p * n): the infimum of {x : p <= F_n(x)}.
double sample_quantile(std::span<const double> values, double p);

/// Mean after dropping floor(f * n) values from each end of the sorted sample.
double trimmed_mean(std::span<const double> values, double f);

/// Trimmed mean of a sample given as distinct values with repetition counts.
/// Identical to trimmed_mean on the expanded sample.
double trimmed_mean_weighted(std::span<const double> values, std::span<const std::size_t> counts, double f);

/// N(W) / |W|.
EstimatorResult estimate_std(const PointPattern& pattern);

/// One uniform is consumed per cell, in cell-index order.
JitteredSample jitter_counts(std::span<const long> counts, double cell_volume, const JitterFunction& phi,
                             RandomStream& stream);

/// Sample median of the jittered cell counts divided by the cell volume.
EstimatorResult estimate_medianJ(const PointPattern& pattern, int cells_per_side, const JitterFunction& phi,
                                 RandomStream& stream);

/// medianJ shifted by -1 / (3 c_n), the Poisson rule-of-thumb correction.
EstimatorResult estimate_medianJ2(const PointPattern& pattern, int cells_per_side, const JitterFunction& phi,
                                  RandomStream& stream);

/// Median-based estimate from a precomputed jittered sample.
double median_intensity(const JitteredSample& sample);

}  // namespace medint
