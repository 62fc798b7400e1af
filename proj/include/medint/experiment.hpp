#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "medint/contamination.hpp"
#include "medint/estimators.hpp"
#include "medint/models.hpp"

namespace medint {

struct VoronoiOptions {
    int grid_per_side = 200;
    std::vector<double> trim_fs{0.025, 0.05, 0.1};
};

/// Dedicated run estimating the intensity of models without a closed form.
struct CalibrationOptions {
    std::size_t replications = 10000;
    double half_side = 1.0;
};

struct ExperimentConfig {
    ModelConfig model = PoissonModel{100.0};
    std::vector<double> half_sides{1.0};
    std::size_t replications = 1000;
    /// Empty means the pure setting only.
    std::vector<ContaminationConfig> settings;
    /// Cells per side s for the median estimators (k_n = s^2).
    std::vector<int> median_cells_per_side;
    JitterFunction jitter = JitterFunction::identity();
    /// Also report the rule-of-thumb corrected median.
    bool rule_of_thumb = false;
    std::optional<VoronoiOptions> voronoi;
    std::uint64_t master_seed = 1;
    /// True intensity for bias/MSE when the model has none (skips calibration).
    std::optional<double> reference_intensity;
    CalibrationOptions calibration;
    double max_failure_fraction = 0.01;
    /// Measure per-estimator wall time. Off by default so records are reproducible byte for byte.
    bool record_timing = false;
};

/// Throws std::invalid_argument describing the first problem found.
void validate(const ExperimentConfig& config);

struct ReplicationRecord {
    std::size_t rep = 0;
    double half_side = 0.0;
    std::size_t setting_index = 0;
    std::string setting;
    double rho = 0.0;
    EstimatorId estimator = EstimatorId::Standard;
    std::size_t cells = 0;
    int grid_per_side = 0;
    double trim = 0.0;
    double value = 0.0;
    double seconds = 0.0;
    bool failed = false;
    std::string error;
    /// Hash of the simulated base pattern, shared by all settings of a replication.
    std::uint64_t base_pattern_hash = 0;

    /// "kn=9", "f=0.05" or "" for the standard estimator.
    std::string param() const;
};

struct AggregateRow {
    std::string model;
    double half_side = 0.0;
    std::size_t setting_index = 0;
    std::string setting;
    double rho = 0.0;
    EstimatorId estimator = EstimatorId::Standard;
    std::string param;
    std::size_t replications = 0;
    std::size_t failures = 0;
    double mean = 0.0;
    double sd = 0.0;
    double bias = 0.0;
    double mse = 0.0;
    /// MSE gain versus the standard estimator on matched replications.
    std::optional<double> gain;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ReplicationRecord> records;
    std::vector<AggregateRow> aggregates;
    double true_intensity = 0.0;
    bool intensity_calibrated = false;
    std::size_t failures = 0;
};

/// Runs every (window, replication) on up to `workers` threads. Output does not
/// depend on the worker count.
ExperimentReport run_experiment(const ExperimentConfig& config, unsigned workers = 1);

/// Mean, sd, bias, MSE and gain per (window, setting, estimator, parameter).
std::vector<AggregateRow> aggregate(const ExperimentReport& report);

/// Mean standard estimate over a pure-setting run.
double calibrate_intensity(const ModelConfig& model, const CalibrationOptions& options, std::uint64_t seed,
                           unsigned workers = 1);

/// FNV-1a over the coordinate bytes.
std::uint64_t pattern_hash(const PointPattern& pattern);

}  // namespace medint
