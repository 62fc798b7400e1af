#include <gtest/gtest.h>

#include <limits>
#include <sstream>
#include <string>
#include <variant>

#include "medint/config.hpp"
#include "medint/io.hpp"

using namespace medint;

namespace {

std::string error_path(const std::string& yaml) {
    try {
        parse_experiment_suite(yaml);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<no error>";
}

}  // namespace

TEST(Config, MinimalDocumentUsesDefaults) {
    const auto c = parse_experiment_config("model: {type: poisson, intensity: 50}\n");
    ASSERT_TRUE(std::holds_alternative<PoissonModel>(c.model));
    EXPECT_EQ(std::get<PoissonModel>(c.model).intensity, 50.0);
    EXPECT_EQ(c.half_sides, std::vector<double>{1.0});
    EXPECT_EQ(c.replications, 1000u);
    EXPECT_TRUE(c.settings.empty());
    EXPECT_FALSE(c.voronoi.has_value());
}

TEST(Config, FullDocument) {
    const auto c = parse_experiment_config(R"(
model: {type: lgcp, intensity: 100, variance: 0.5, scale: 0.02}
windows: [1, 2]
replications: 20
seed: 7
settings:
  - A
  - {type: B, rho: 0.05}
  - {type: C, rho: 0.1}
median: {cells_per_side: [3, 4], rule_of_thumb: true}
voronoi: {grid_per_side: 50, trim: [0.1]}
max_failure_fraction: 0.5
)");
    EXPECT_EQ(c.half_sides, (std::vector<double>{1.0, 2.0}));
    EXPECT_EQ(c.master_seed, 7u);
    ASSERT_EQ(c.settings.size(), 3u);
    EXPECT_EQ(setting_label(c.settings[1]), "B");
    EXPECT_EQ(setting_rho(c.settings[2]), 0.1);
    EXPECT_EQ(c.median_cells_per_side, (std::vector<int>{3, 4}));
    EXPECT_TRUE(c.rule_of_thumb);
    ASSERT_TRUE(c.voronoi.has_value());
    EXPECT_EQ(c.voronoi->grid_per_side, 50);
    EXPECT_EQ(c.max_failure_fraction, 0.5);
}

TEST(Config, ErrorsNameTheField) {
    EXPECT_EQ(error_path("windows: [1]\n"), "model");
    EXPECT_EQ(error_path("model: {type: poisson, intensity: 1}\nbogus: 1\n"), "bogus");
    EXPECT_EQ(error_path("model: {type: poisson, intensty: 1}\n"), "model.intensty");
    EXPECT_EQ(error_path("model: {type: poisson, intensity: 1}\nmedian: {cells_per_side: [3, 1]}\n"),
              "median.cells_per_side[1]");
    EXPECT_EQ(error_path("model: {type: poisson, intensity: 1}\nsettings: [{type: B, rho: 2}]\n"), "settings[0].rho");
    EXPECT_EQ(error_path("model: {type: poisson, intensity: 1}\nsettings: [{type: A, rho: 0.1}]\n"), "settings[0].rho");
    EXPECT_EQ(error_path("model: {type: poisson, intensity: 1}\nreplications: -3\n"), "replications");
    EXPECT_EQ(error_path("model: {type: poisson, intensity: 1}\nreplications: 0\n"), "replications");
    EXPECT_EQ(error_path("model: {type: poisson, intensity: 1}\nwindows: [0]\n"), "windows[0]");
    EXPECT_EQ(error_path("model: {type: poisson, intensity: 1}\nvoronoi: {trim: [0.5]}\n"), "voronoi.trim[0]");
    EXPECT_EQ(error_path("model: {type: banana}\n"), "model.type");
    EXPECT_EQ(error_path("model: [1, 2\n"), "<root>");
}

TEST(Config, ModelsList) {
    const auto suite = parse_experiment_suite(R"(
models:
  - {type: poisson, intensity: 100}
  - {type: phc, beta: 200, radius: 0.05, reference_intensity: 86}
replications: 5
)");
    ASSERT_EQ(suite.size(), 2u);
    EXPECT_EQ(suite[1].reference_intensity, 86.0);
    EXPECT_EQ(suite[0].replications, 5u);
    EXPECT_EQ(suite[1].replications, 5u);
    EXPECT_THROW(parse_experiment_config("models: [{type: poisson, intensity: 1}, {type: lgcp, intensity: 1, "
                                         "variance: 1, scale: 0.1}]\n"),
                 ConfigError);
    EXPECT_EQ(error_path("models: [{type: poisson, intensity: 1}, {type: poisson, intensity: 2}]\n"), "models[1]");
}

TEST(Config, DigestIsStable) {
    const auto a = parse_experiment_config("model: {type: poisson, intensity: 100}\nseed: 3\n");
    const auto b = parse_experiment_config("seed: 3\nmodel:\n  intensity: 100.0\n  type: poisson\n");
    EXPECT_EQ(config_digest(a), config_digest(b));
    EXPECT_EQ(config_digest(a).size(), 16u);
    const auto c = parse_experiment_config("model: {type: poisson, intensity: 100}\nseed: 4\n");
    EXPECT_NE(config_digest(a), config_digest(c));
    EXPECT_EQ(canonical_json(a).dump(), canonical_json(b).dump());
}

TEST(Config, BundledConfigsParse) {
    for (int t = 1; t <= 5; ++t) {
        const std::string path = std::string(MEDINT_SOURCE_DIR) + "/configs/table" + std::to_string(t) + ".cfg";
        std::vector<ExperimentConfig> suite;
        ASSERT_NO_THROW(suite = load_experiment_suite(path)) << path;
        ASSERT_FALSE(suite.empty());
        for (const auto& c : suite) {
            EXPECT_NO_THROW(validate(c));
        }
    }
}

TEST(Config, MissingFile) { EXPECT_THROW(load_experiment_suite("/nonexistent/x.cfg"), std::runtime_error); }

// ---------------------------------------------------------------------------
// pattern files

TEST(PatternIo, RoundTripIsExact) {
    PointPattern p(Window::square(2.0));
    p.add(0.1, -1.9999999999999998);
    p.add(1.0 / 3.0, 2.0);
    p.add(-2.0, 0.0);
    std::stringstream ss;
    write_pattern(ss, p);
    const auto q = read_pattern(ss);
    EXPECT_EQ(q.window().half_side(), 2.0);
    EXPECT_EQ(q.coords(), p.coords());
}

TEST(PatternIo, EmptyPattern) {
    std::stringstream ss;
    write_pattern(ss, PointPattern(Window::square(1.0)));
    EXPECT_EQ(ss.str(), "# dim=2 n=1 count=0\n");
    EXPECT_TRUE(read_pattern(ss).empty());
}

TEST(PatternIo, MalformedInputReportsLine) {
    const auto fails_at = [](const std::string& text) {
        std::istringstream in(text);
        try {
            read_pattern(in);
        } catch (const std::runtime_error& e) {
            return std::string(e.what());
        }
        return std::string("<no error>");
    };
    EXPECT_NE(fails_at("# dim=2 n=1 count=2\n0 0\n0.5 x\n").find("line 3"), std::string::npos);
    EXPECT_NE(fails_at("# dim=2 n=1 count=1\n0 5\n").find("line 2"), std::string::npos);
    EXPECT_NE(fails_at("# dim=2 n=1 count=3\n0 0\n"), "<no error>");
    EXPECT_NE(fails_at("0 0\n"), "<no error>");
}

TEST(Csv, Headers) {
    ExperimentReport report;
    std::ostringstream rec;
    write_records_csv(rec, report);
    EXPECT_EQ(rec.str(), "rep,n,setting,rho,estimator,param,value,seconds\n");
    std::ostringstream agg;
    write_aggregates_csv(agg, {});
    EXPECT_EQ(agg.str(), "model,n,setting,rho,estimator,param,mean,sd,bias,mse,gain_pct\n");
}

TEST(Csv, RecordLine) {
    ExperimentReport report;
    ReplicationRecord r;
    r.rep = 3;
    r.half_side = 2.0;
    r.setting = "B";
    r.rho = 0.05;
    r.estimator = EstimatorId::MedianJ;
    r.cells = 25;
    r.value = 101.25;
    report.records.push_back(r);
    std::ostringstream out;
    write_records_csv(out, report);
    EXPECT_EQ(out.str(), "rep,n,setting,rho,estimator,param,value,seconds\n3,2,B,0.05,medianJ,kn=25,101.25,0\n");
}

TEST(Csv, FormatDouble) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1.0 / 3.0), "0.3333333333333333");
    EXPECT_EQ(std::stod(format_double(2.0 / 3.0)), 2.0 / 3.0);
    EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
}
