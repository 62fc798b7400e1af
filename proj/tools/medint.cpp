#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "medint/config.hpp"
#include "medint/estimators.hpp"
#include "medint/experiment.hpp"
#include "medint/io.hpp"
#include "medint/models.hpp"
#include "medint/parallel.hpp"
#include "medint/theory.hpp"
#include "medint/voronoi.hpp"

namespace fs = std::filesystem;
using namespace medint;

namespace {

struct ModelFlags {
    std::string model = "poisson";
    double lambda = 100.0;
    double sigma2 = 0.5;
    double phi = 0.02;
    double spacing = 0.0;
    double kappa = 25.0;
    double alpha = 4.0;
    double sigma = 0.03;
    double beta = 200.0;
    double radius = 0.05;
    std::uint64_t mh_steps = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--model", model, "poisson | lgcp | thomas | matern | phc")
            ->check(CLI::IsMember({"poisson", "lgcp", "thomas", "matern", "phc"}))
            ->capture_default_str();
        cmd->add_option("--lambda", lambda, "intensity (poisson, lgcp)")->capture_default_str();
        cmd->add_option("--sigma2", sigma2, "log-field variance (lgcp)")->capture_default_str();
        cmd->add_option("--phi", phi, "correlation scale (lgcp)")->capture_default_str();
        cmd->add_option("--spacing", spacing, "field pixel spacing, 0 = phi/2 (lgcp)");
        cmd->add_option("--kappa", kappa, "parent intensity (thomas, matern)")->capture_default_str();
        cmd->add_option("--alpha", alpha, "mean offspring count (thomas, matern)")->capture_default_str();
        cmd->add_option("--sigma", sigma, "offspring spread (thomas, matern)")->capture_default_str();
        cmd->add_option("--beta", beta, "activity (phc)")->capture_default_str();
        cmd->add_option("--R", radius, "hard-core distance (phc)")->capture_default_str();
        cmd->add_option("--mh-steps", mh_steps, "birth-death steps, 0 = automatic (phc)");
    }

    ModelConfig build() const {
        ModelConfig m;
        if (model == "poisson") {
            m = PoissonModel{lambda};
        } else if (model == "lgcp") {
            m = LgcpModel::from_intensity(lambda, sigma2, phi, spacing);
        } else if (model == "thomas") {
            m = ThomasModel{kappa, alpha, sigma};
        } else if (model == "matern") {
            m = MaternClusterModel{kappa, alpha, sigma};
        } else {
            HardCoreModel h;
            h.beta = beta;
            h.radius = radius;
            h.mh_steps = mh_steps;
            m = h;
        }
        validate(m);
        return m;
    }
};

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) {
        throw std::runtime_error("failed writing '" + path.string() + "'");
    }
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const ModelFlags& flags, double half_side, std::uint64_t seed, const std::string& output) {
    const auto model = flags.build();
    auto stream = substream(seed, 0);
    const Simulator sim(model, Window::square(half_side));
    const auto pattern = sim.simulate(stream);
    if (output.empty() || output == "-") {
        write_pattern(std::cout, pattern);
    } else {
        write_pattern_file(output, pattern);
        std::cout << pattern.size() << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateFlags {
    std::string input;
    std::vector<std::string> estimators{"std", "medianJ"};
    std::vector<int> cells_per_side{3, 4, 5, 6, 7};
    std::string jitter = "identity";
    int grid = 200;
    std::vector<double> trims{0.025, 0.05, 0.1};
    std::uint64_t seed = 1;
};

int cmd_estimate(const EstimateFlags& flags) {
    const auto pattern = read_pattern_file(flags.input);
    const auto phi = JitterFunction::parse(flags.jitter);
    std::cout << "estimator,param,value\n";
    for (const auto& name : flags.estimators) {
        if (name == "std") {
            std::cout << "std,," << format_double(estimate_std(pattern).value) << '\n';
        } else if (name == "medianJ" || name == "medianJ2") {
            for (const int s : flags.cells_per_side) {
                // Same derivation for both variants so medianJ2 = medianJ - 1/(3c).
                auto stream = substream(flags.seed, 0).derive(static_cast<std::uint64_t>(s));
                const auto r = name == "medianJ" ? estimate_medianJ(pattern, s, phi, stream)
                                                 : estimate_medianJ2(pattern, s, phi, stream);
                std::cout << name << ",kn=" << r.cells << ',' << format_double(r.value) << '\n';
            }
        } else if (name == "voronoi") {
            for (const auto& r : estimate_voronoi(pattern, flags.grid, flags.trims)) {
                char param[32];
                std::snprintf(param, sizeof param, "f=%g", r.trim);
                std::cout << "voronoi," << param << ',' << format_double(r.value) << '\n';
            }
        } else {
            throw CLI::ValidationError("--estimator", "unknown estimator '" + name + "'");
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// experiment

int cmd_experiment(const std::string& config_path, const std::string& output_dir, unsigned workers, bool timing,
                   std::optional<std::uint64_t> seed) {
    auto suite = load_experiment_suite(config_path);
    for (auto& config : suite) {
        if (seed) {
            config.master_seed = *seed;
        }
        if (timing) {
            config.record_timing = true;
        }
    }
    const fs::path dir(output_dir);
    fs::create_directories(dir);
    const bool single = suite.size() == 1;

    std::vector<AggregateRow> all_rows;
    auto runs = nlohmann::json::array();
    auto outputs = nlohmann::json::object();
    for (const auto& config : suite) {
        const auto name = model_name(config.model);
        std::cerr << "running " << name << " (" << config.replications << " replications)\n";
        const auto started = std::chrono::steady_clock::now();
        const auto report = run_experiment(config, workers);
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        const auto records_path = single ? dir / "records.csv" : dir / ("records_" + name + ".csv");
        auto out = open_output(records_path);
        write_records_csv(out, report);
        close_output(out, records_path);
        outputs["records_" + name] = records_path.string();
        all_rows.insert(all_rows.end(), report.aggregates.begin(), report.aggregates.end());

        runs.push_back({{"model", name},
                        {"config", canonical_json(config)},
                        {"config_digest", config_digest(config)},
                        {"true_intensity", report.true_intensity},
                        {"intensity_calibrated", report.intensity_calibrated},
                        {"failures", report.failures},
                        {"elapsed_seconds", elapsed}});
    }

    const auto aggregates_path = dir / "aggregates.csv";
    auto out = open_output(aggregates_path);
    write_aggregates_csv(out, all_rows);
    close_output(out, aggregates_path);
    outputs["aggregates"] = aggregates_path.string();

    const auto manifest_path = dir / "manifest.json";
    nlohmann::json manifest;
    manifest["config_path"] = config_path;
    manifest["master_seed"] = suite.front().master_seed;
    manifest["version"] = MEDINT_VERSION;
    manifest["timestamp"] = utc_timestamp();
    manifest["workers"] = workers;
    manifest["jitter_draws"] = "fresh uniforms per (replication, k_n), shared by all contamination settings";
    manifest["runs"] = runs;
    manifest["outputs"] = outputs;
    auto mout = open_output(manifest_path);
    mout << manifest.dump(2) << '\n';
    close_output(mout, manifest_path);

    write_aggregates_csv(std::cout, all_rows);
    std::cerr << "wrote " << dir.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// median-figure

struct FigureFlags {
    double nu_min = 0.5;
    double nu_max = 100.0;
    std::size_t points = 1000;
    std::vector<std::string> phis{"sqrt", "identity", "power:2"};
    std::string output;
    std::string svg;
    bool deterministic = false;
};

struct FigureRow {
    double nu;
    double pi_offset;
    std::vector<double> z_offsets;
};

void write_svg(const fs::path& path, const FigureFlags& flags, const std::vector<JitterFunction>& phis,
               const std::vector<FigureRow>& rows) {
    constexpr double width = 720.0;
    constexpr double height = 420.0;
    constexpr double margin = 50.0;
    double lo = -0.75;
    double hi = 0.75;
    for (const auto& r : rows) {
        for (const double v : r.z_offsets) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const auto sx = [&](double nu) {
        return margin + (nu - flags.nu_min) / (flags.nu_max - flags.nu_min) * (width - 2 * margin);
    };
    const auto sy = [&](double v) { return height - margin - (v - lo) / (hi - lo) * (height - 2 * margin); };
    const char* colors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};

    auto out = open_output(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    if (!flags.deterministic) {
        out << "<!-- generated " << utc_timestamp() << " -->\n";
    }
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << sy(0) << "\" x2=\"" << width - margin << "\" y2=\"" << sy(0)
        << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    for (const double level : {-std::log(2.0), 1.0 / 3.0}) {
        out << "<line x1=\"" << margin << "\" y1=\"" << sy(level) << "\" x2=\"" << width - margin << "\" y2=\""
            << sy(level) << "\" stroke=\"#ccc\"/>\n";
    }
    const auto polyline = [&](auto value, const char* color, double stroke) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << stroke << "\" points=\"";
        for (const auto& r : rows) {
            out << sx(r.nu) << ',' << sy(value(r)) << ' ';
        }
        out << "\"/>\n";
    };
    polyline([](const FigureRow& r) { return r.pi_offset; }, "#444", 0.8);
    for (std::size_t j = 0; j < phis.size(); ++j) {
        polyline([j](const FigureRow& r) { return r.z_offsets[j]; }, colors[j % 6], 1.5);
        out << "<text x=\"" << width - margin - 120 << "\" y=\"" << margin + 16.0 * static_cast<double>(j)
            << "\" fill=\"" << colors[j % 6] << "\" font-size=\"12\">" << phis[j].name() << "</text>\n";
    }
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12 << "\" font-size=\"12\">nu</text>\n";
    out << "<text x=\"8\" y=\"" << margin - 12 << "\" font-size=\"12\">median - nu</text>\n";
    out << "</svg>\n";
    close_output(out, path);
}

int cmd_median_figure(const FigureFlags& flags) {
    if (!(flags.nu_min > 0.0) || !(flags.nu_max >= flags.nu_min) || flags.points < 1) {
        throw CLI::ValidationError("--nu-min/--nu-max/--points", "need 0 < nu-min <= nu-max and points >= 1");
    }
    std::vector<JitterFunction> phis;
    for (const auto& p : flags.phis) {
        phis.push_back(JitterFunction::parse(p));
    }
    std::vector<FigureRow> rows;
    rows.reserve(flags.points);
    for (std::size_t i = 0; i < flags.points; ++i) {
        const double nu = flags.points == 1 ? flags.nu_min
                                            : flags.nu_min + (flags.nu_max - flags.nu_min) * static_cast<double>(i) /
                                                                 static_cast<double>(flags.points - 1);
        FigureRow row{nu, 0.0, {}};
        for (const auto& phi : phis) {
            const auto rep = exact_jittered_median(nu, phi);
            row.pi_offset = static_cast<double>(rep.integer_median) - nu;
            row.z_offsets.push_back(rep.offset);
        }
        rows.push_back(std::move(row));
    }

    std::ostringstream csv;
    csv << "nu,phi,me_pi_minus_nu,me_z_minus_nu\n";
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < phis.size(); ++j) {
            csv << format_double(r.nu) << ',' << phis[j].name() << ',' << format_double(r.pi_offset) << ','
                << format_double(r.z_offsets[j]) << '\n';
        }
    }
    if (flags.output.empty() || flags.output == "-") {
        std::cout << csv.str();
    } else {
        auto out = open_output(flags.output);
        out << csv.str();
        close_output(out, flags.output);
    }
    if (!flags.svg.empty()) {
        write_svg(flags.svg, flags, phis, rows);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// diagnostics

int cmd_diagnostics(const ModelFlags& model_flags, const CltOptions& options) {
    const auto model = model_flags.build();
    const auto rows = clt_diagnostics(model, options);
    std::cout << "model,n,kn,cell_volume,intensity,sigma2,median_z,median_exact,ecdf_variance,ecdf_target,"
                 "scaled_variance,scaled_variance_target,variance_ratio,ratio_target,scaled_pmf,scaled_pmf_target,"
                 "coverage,confidence,mean_j,mean_std\n";
    for (const auto& d : rows) {
        std::cout << model_name(model) << ',' << format_double(d.half_side) << ',' << d.cells << ','
                  << format_double(d.cell_volume) << ',' << format_double(d.intensity) << ','
                  << format_double(d.sigma2) << ',' << format_double(d.median_z) << ',' << d.median_exact << ','
                  << format_double(d.ecdf_variance) << ",0.25," << format_double(d.scaled_variance) << ','
                  << format_double(d.scaled_variance_target) << ',' << format_double(d.variance_ratio) << ','
                  << format_double(std::numbers::pi / 2) << ',' << format_double(d.scaled_pmf) << ','
                  << format_double(d.scaled_pmf_target) << ',' << format_double(d.coverage) << ','
                  << format_double(options.confidence) << ',' << format_double(d.mean_j) << ','
                  << format_double(d.mean_std) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Median-based intensity estimation for spatial point processes"};
    app.set_version_flag("--version", std::string(MEDINT_VERSION));
    app.require_subcommand(1);

    ModelFlags sim_model;
    double sim_n = 1.0;
    std::uint64_t sim_seed = 1;
    std::string sim_output;
    auto* simulate = app.add_subcommand("simulate", "Simulate one pattern on [-n, n]^2");
    sim_model.attach(simulate);
    simulate->add_option("--n", sim_n, "window half-side")->capture_default_str()->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim_seed, "master seed")->capture_default_str();
    simulate->add_option("-o,--output", sim_output, "pattern file (stdout when omitted)");

    EstimateFlags est;
    auto* estimate = app.add_subcommand("estimate", "Estimate the intensity of a pattern file");
    estimate->add_option("input", est.input, "pattern file")->required()->check(CLI::ExistingFile);
    estimate->add_option("--estimator", est.estimators, "std, medianJ, medianJ2, voronoi")->capture_default_str();
    estimate->add_option("--cells", est.cells_per_side, "cells per side for the median estimators")
        ->capture_default_str();
    estimate->add_option("--jitter", est.jitter, "identity | sqrt | power:<p>")->capture_default_str();
    estimate->add_option("--grid", est.grid, "dummy points per side (voronoi)")->capture_default_str();
    estimate->add_option("--trim", est.trims, "trim fractions (voronoi)")->capture_default_str();
    estimate->add_option("--seed", est.seed, "seed for the jitter uniforms")->capture_default_str();

    std::string exp_config;
    std::string exp_output = "results";
    unsigned exp_workers = default_workers();
    bool exp_timing = false;
    std::optional<std::uint64_t> exp_seed;
    auto* experiment = app.add_subcommand("experiment", "Run a replicated experiment from a YAML config");
    experiment->add_option("config", exp_config, "config file")->required()->check(CLI::ExistingFile);
    experiment->add_option("--output-dir", exp_output, "directory for CSV and manifest")->capture_default_str();
    experiment->add_option("--workers", exp_workers, "worker threads (default: MEDINT_WORKERS or all cores)")
        ->check(CLI::PositiveNumber);
    experiment->add_option("--seed", exp_seed, "override the config's master seed");
    experiment->add_flag("--timing", exp_timing, "record wall time per estimate (records are then not reproducible)");

    FigureFlags fig;
    std::uint64_t fig_seed = 0;
    auto* figure = app.add_subcommand("median-figure", "Exact medians of Poisson and jittered Poisson counts");
    figure->add_option("--nu-min", fig.nu_min)->capture_default_str();
    figure->add_option("--nu-max", fig.nu_max)->capture_default_str();
    figure->add_option("--points", fig.points, "grid size in nu")->capture_default_str();
    figure->add_option("--phi", fig.phis, "jitter functions")->capture_default_str();
    figure->add_option("-o,--output", fig.output, "CSV file (stdout when omitted)");
    figure->add_option("--svg", fig.svg, "also draw an SVG plot");
    figure->add_flag("--deterministic", fig.deterministic, "omit the timestamp from the plot");
    figure->add_option("--seed", fig_seed, "accepted for uniformity; the computation is exact");

    ModelFlags diag_model;
    CltOptions clt;
    clt.workers = default_workers();
    std::optional<double> diag_reference;
    std::optional<double> diag_sigma2;
    auto* diagnostics = app.add_subcommand("diagnostics", "Finite-sample checks of the median estimator's CLT");
    diag_model.attach(diagnostics);
    diagnostics->add_option("--n", clt.half_sides, "window half-sides")->capture_default_str();
    diagnostics->add_option("--cells", clt.cells_per_side, "cells per side")->capture_default_str();
    diagnostics->add_option("--reps", clt.replications, "replications")->capture_default_str();
    diagnostics->add_option("--seed", clt.seed, "master seed")->capture_default_str();
    diagnostics->add_option("--workers", clt.workers, "worker threads")->check(CLI::PositiveNumber);
    diagnostics->add_option("--confidence", clt.confidence, "interval level")->capture_default_str();
    diagnostics->add_option("--reference-intensity", diag_reference, "true intensity (required for phc)");
    diagnostics->add_option("--sigma2-override", diag_sigma2, "asymptotic count variance to use");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*simulate) {
            return cmd_simulate(sim_model, sim_n, sim_seed, sim_output);
        }
        if (*estimate) {
            return cmd_estimate(est);
        }
        if (*experiment) {
            return cmd_experiment(exp_config, exp_output, exp_workers, exp_timing, exp_seed);
        }
        if (*figure) {
            return cmd_median_figure(fig);
        }
        if (*diagnostics) {
            clt.reference_intensity = diag_reference;
            clt.sigma2 = diag_sigma2;
            return cmd_diagnostics(diag_model, clt);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
