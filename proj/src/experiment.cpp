#include "medint/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

#include "medint/parallel.hpp"
#include "medint/theory.hpp"
#include "medint/voronoi.hpp"

namespace medint {

namespace {

constexpr std::uint64_t kWindowTag = 0x3D1;
constexpr std::uint64_t kSimulationTag = 0x51;
constexpr std::uint64_t kContaminationTag = 0xC0;
constexpr std::uint64_t kJitterTag = 0x7177;
constexpr std::uint64_t kCalibrationTag = 0xCA11B;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// Everything produced for one (window, replication) work unit.
std::vector<ReplicationRecord> run_replication(const ExperimentConfig& config, const Simulator& simulator,
                                               std::size_t window_index, std::size_t rep,
                                               const std::vector<ContaminationConfig>& settings) {
    const RandomStream base = substream(config.master_seed, rep).derive(kWindowTag + window_index);
    RandomStream sim_stream = base.derive(kSimulationTag);
    const PointPattern pattern = simulator.simulate(sim_stream);
    const std::uint64_t hash = pattern_hash(pattern);
    const double n = simulator.window().half_side();

    std::vector<ReplicationRecord> out;
    for (std::size_t s = 0; s < settings.size(); ++s) {
        RandomStream contamination_stream = base.derive(kContaminationTag + s);
        const PointPattern observed = contaminate(pattern, settings[s], contamination_stream);

        ReplicationRecord proto;
        proto.rep = rep;
        proto.half_side = n;
        proto.setting_index = s;
        proto.setting = setting_label(settings[s]);
        proto.rho = setting_rho(settings[s]);
        proto.base_pattern_hash = hash;

        {
            const auto start = Clock::now();
            ReplicationRecord r = proto;
            r.estimator = EstimatorId::Standard;
            r.value = estimate_std(observed).value;
            r.seconds = config.record_timing ? seconds_since(start) : 0.0;
            out.push_back(r);
        }

        for (const int cells : config.median_cells_per_side) {
            const auto start = Clock::now();
            // Same jitter uniforms for every setting of this replication and k_n.
            RandomStream jitter = base.derive(kJitterTag + static_cast<std::uint64_t>(cells));
            const Tessellation tess = make_tessellation(observed.window(), cells);
            const auto counts = count_per_cell(observed, tess);
            const double value = median_intensity(jitter_counts(counts, tess.cell_volume(), config.jitter, jitter));
            const double elapsed = config.record_timing ? seconds_since(start) : 0.0;

            ReplicationRecord r = proto;
            r.estimator = EstimatorId::MedianJ;
            r.cells = tess.cell_count();
            r.value = value;
            r.seconds = elapsed;
            out.push_back(r);
            if (config.rule_of_thumb) {
                r.estimator = EstimatorId::MedianJ2;
                r.value = value - 1.0 / (3.0 * tess.cell_volume());
                out.push_back(r);
            }
        }

        if (config.voronoi) {
            const auto& vor = *config.voronoi;
            const auto start = Clock::now();
            std::vector<ReplicationRecord> rows;
            try {
                const auto results = estimate_voronoi(observed, vor.grid_per_side, vor.trim_fs);
                for (const auto& res : results) {
                    ReplicationRecord r = proto;
                    r.estimator = EstimatorId::Voronoi;
                    r.grid_per_side = vor.grid_per_side;
                    r.trim = res.trim;
                    r.value = res.value;
                    rows.push_back(r);
                }
            } catch (const std::exception& e) {
                for (const double f : vor.trim_fs) {
                    ReplicationRecord r = proto;
                    r.estimator = EstimatorId::Voronoi;
                    r.grid_per_side = vor.grid_per_side;
                    r.trim = f;
                    r.value = std::numeric_limits<double>::quiet_NaN();
                    r.failed = true;
                    r.error = e.what();
                    rows.push_back(r);
                }
            }
            const double elapsed = config.record_timing ? seconds_since(start) : 0.0;
            for (auto& r : rows) {
                r.seconds = elapsed;
                out.push_back(std::move(r));
            }
        }
    }
    return out;
}

}  // namespace

std::string ReplicationRecord::param() const {
    switch (estimator) {
        case EstimatorId::MedianJ:
        case EstimatorId::MedianJ2:
            return "kn=" + std::to_string(cells);
        case EstimatorId::Voronoi:
            return "f=" + format_number(trim);
        case EstimatorId::Standard:
            break;
    }
    return "";
}

void validate(const ExperimentConfig& config) {
    validate(config.model);
    if (config.replications < 1) {
        throw std::invalid_argument("replications must be >= 1");
    }
    if (config.half_sides.empty()) {
        throw std::invalid_argument("at least one window half side is required");
    }
    for (const double n : config.half_sides) {
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw std::invalid_argument("window half sides must be > 0");
        }
    }
    for (const auto& s : config.settings) {
        validate(s);
    }
    for (const int s : config.median_cells_per_side) {
        if (s < 2) {
            throw std::invalid_argument("median estimators need cells_per_side >= 2");
        }
    }
    if (config.voronoi) {
        if (config.voronoi->grid_per_side < 1) {
            throw std::invalid_argument("voronoi grid_per_side must be >= 1");
        }
        for (const double f : config.voronoi->trim_fs) {
            if (!(f >= 0.0 && f < 0.5)) {
                throw std::invalid_argument("voronoi trim fractions must lie in [0, 0.5)");
            }
        }
    }
    if (config.reference_intensity && !(*config.reference_intensity >= 0.0)) {
        throw std::invalid_argument("reference intensity must be >= 0");
    }
    if (config.calibration.replications < 1 || !(config.calibration.half_side > 0.0)) {
        throw std::invalid_argument("calibration needs replications >= 1 and half_side > 0");
    }
    if (!(config.max_failure_fraction >= 0.0 && config.max_failure_fraction <= 1.0)) {
        throw std::invalid_argument("max_failure_fraction must lie in [0, 1]");
    }
}

std::uint64_t pattern_hash(const PointPattern& pattern) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (const double v : pattern.coords()) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof v);
        for (const unsigned char b : bytes) {
            h ^= b;
            h *= 0x100000001B3ull;
        }
    }
    return h;
}

double calibrate_intensity(const ModelConfig& model, const CalibrationOptions& options, std::uint64_t seed,
                           unsigned workers) {
    const Simulator simulator(model, Window::square(options.half_side));
    std::vector<double> values(options.replications);
    parallel_for(options.replications, workers, [&](std::size_t r) {
        RandomStream stream = substream(seed, r).derive(kCalibrationTag);
        values[r] = estimate_std(simulator.simulate(stream)).value;
    });
    double sum = 0.0;
    for (const double v : values) {
        sum += v;
    }
    return sum / static_cast<double>(values.size());
}

ExperimentReport run_experiment(const ExperimentConfig& config, unsigned workers) {
    validate(config);
    ExperimentReport report;
    report.config = config;
    const std::vector<ContaminationConfig> settings =
        config.settings.empty() ? std::vector<ContaminationConfig>{PureSetting{}} : config.settings;

    if (const auto lambda = model_intensity(config.model)) {
        report.true_intensity = *lambda;
    } else if (config.reference_intensity) {
        report.true_intensity = *config.reference_intensity;
    } else {
        report.true_intensity = calibrate_intensity(config.model, config.calibration, config.master_seed, workers);
        report.intensity_calibrated = true;
    }

    std::vector<Simulator> simulators;
    simulators.reserve(config.half_sides.size());
    for (const double n : config.half_sides) {
        simulators.emplace_back(config.model, Window::square(n));
    }

    const std::size_t reps = config.replications;
    std::vector<std::vector<ReplicationRecord>> slots(simulators.size() * reps);
    parallel_for(slots.size(), workers, [&](std::size_t unit) {
        const std::size_t w = unit / reps;
        const std::size_t r = unit % reps;
        slots[unit] = run_replication(config, simulators[w], w, r, settings);
    });

    for (auto& slot : slots) {
        for (auto& rec : slot) {
            if (rec.failed) {
                ++report.failures;
            }
            report.records.push_back(std::move(rec));
        }
    }
    if (!report.records.empty() &&
        static_cast<double>(report.failures) > config.max_failure_fraction * static_cast<double>(report.records.size())) {
        std::string first_error;
        for (const auto& rec : report.records) {
            if (rec.failed) {
                first_error = rec.error;
                break;
            }
        }
        throw std::runtime_error("too many failed estimator evaluations (" + std::to_string(report.failures) + " of " +
                                 std::to_string(report.records.size()) + "): " + first_error);
    }
    report.aggregates = aggregate(report);
    return report;
}

std::vector<AggregateRow> aggregate(const ExperimentReport& report) {
    const double truth = report.true_intensity;
    const std::string model = model_name(report.config.model);

    using Key = std::tuple<double, std::size_t, int, std::string>;
    std::map<Key, std::size_t> group_of;
    std::vector<Key> keys;
    std::vector<std::vector<const ReplicationRecord*>> groups;
    // Standard estimates by (window, setting, rep) for matched MSE.
    std::map<std::tuple<double, std::size_t, std::size_t>, double> std_values;

    for (const auto& rec : report.records) {
        const Key key{rec.half_side, rec.setting_index, static_cast<int>(rec.estimator), rec.param()};
        auto [it, inserted] = group_of.try_emplace(key, groups.size());
        if (inserted) {
            keys.push_back(key);
            groups.emplace_back();
        }
        groups[it->second].push_back(&rec);
        if (rec.estimator == EstimatorId::Standard && !rec.failed) {
            std_values[{rec.half_side, rec.setting_index, rec.rep}] = rec.value;
        }
    }

    std::vector<AggregateRow> rows;
    rows.reserve(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& members = groups[g];
        const ReplicationRecord& first = *members.front();
        AggregateRow row;
        row.model = model;
        row.half_side = first.half_side;
        row.setting_index = first.setting_index;
        row.setting = first.setting;
        row.rho = first.rho;
        row.estimator = first.estimator;
        row.param = first.param();

        double sum = 0.0;
        double sq_err = 0.0;
        double std_sq_err = 0.0;
        std::size_t matched = 0;
        for (const auto* rec : members) {
            if (rec->failed) {
                ++row.failures;
                continue;
            }
            ++row.replications;
            sum += rec->value;
            sq_err += (rec->value - truth) * (rec->value - truth);
            const auto it = std_values.find({rec->half_side, rec->setting_index, rec->rep});
            if (it != std_values.end()) {
                std_sq_err += (it->second - truth) * (it->second - truth);
                ++matched;
            }
        }
        const double count = static_cast<double>(row.replications);
        if (row.replications == 0) {
            row.mean = row.sd = row.bias = row.mse = std::numeric_limits<double>::quiet_NaN();
            rows.push_back(row);
            continue;
        }
        row.mean = sum / count;
        double ss = 0.0;
        for (const auto* rec : members) {
            if (!rec->failed) {
                ss += (rec->value - row.mean) * (rec->value - row.mean);
            }
        }
        row.sd = row.replications >= 2 ? std::sqrt(ss / (count - 1.0)) : std::numeric_limits<double>::quiet_NaN();
        row.bias = row.mean - truth;
        row.mse = sq_err / count;
        if (row.estimator == EstimatorId::Standard) {
            row.gain = 0.0;
        } else if (matched == row.replications && std_sq_err > 0.0) {
            row.gain = gain(std_sq_err / static_cast<double>(matched), row.mse);
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace medint
