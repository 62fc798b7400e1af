#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "medint/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int status = -1;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(MEDINT_CLI_PATH) + " " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        return r;
    }
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) {
        r.out.append(buf, got);
    }
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        rows.push_back(cells);
    }
    return rows;
}

fs::path temp_dir() {
    const auto dir = fs::temp_directory_path() / ("medint_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST(Cli, SimulateIsReproducible) {
    const auto a = run("simulate --model poisson --lambda 100 --n 1 --seed 5");
    const auto b = run("simulate --model poisson --lambda 100 --n 1 --seed 5");
    ASSERT_EQ(a.status, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, run("simulate --model poisson --lambda 100 --n 1 --seed 6").out);
    std::istringstream in(a.out);
    const auto p = medint::read_pattern(in);
    EXPECT_GT(p.size(), 0u);
}

TEST(Cli, HardCoreRespectsRadius) {
    const auto r = run("simulate --model phc --beta 200 --R 0.05 --n 1 --seed 3");
    ASSERT_EQ(r.status, 0);
    std::istringstream in(r.out);
    const auto p = medint::read_pattern(in);
    ASSERT_GT(p.size(), 10u);
    double min_d = INFINITY;
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = i + 1; j < p.size(); ++j) {
            min_d = std::min(min_d, std::hypot(p[i][0] - p[j][0], p[i][1] - p[j][1]));
        }
    }
    EXPECT_GE(min_d, 0.05);
}

TEST(Cli, ZeroIntensityGivesEmptyPattern) {
    const auto r = run("simulate --model poisson --lambda 0 --n 1");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(r.out, "# dim=2 n=1 count=0\n");
}

TEST(Cli, SimulateThenEstimate) {
    const auto dir = temp_dir();
    const auto file = (dir / "p.txt").string();
    ASSERT_EQ(run("simulate --model poisson --lambda 100 --n 2 --seed 1 -o " + file).status, 0);
    const auto r = run("estimate " + file + " --estimator std --estimator medianJ --cells 5");
    ASSERT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("std"), std::string::npos);
    EXPECT_NE(r.out.find("medianJ"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Cli, MedianFigure) {
    const auto r = run("median-figure --nu-min 1 --nu-max 100 --points 100 --phi identity --phi sqrt");
    ASSERT_EQ(r.status, 0);
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 200u);
    const double ln2 = std::log(2.0);
    for (const auto& row : rows) {
        ASSERT_EQ(row.size(), 4u);
        const double nu = std::stod(row[0]);
        const double pi = std::stod(row[2]);
        const double z = std::stod(row[3]);
        // nu is an integer on this grid, where the Poisson median equals nu.
        EXPECT_EQ(pi, 0.0) << nu;
        EXPECT_GE(z, -ln2 - 1e-12);
        EXPECT_LE(z, 1.0);
        if (row[1] == "identity" && nu >= 50) {
            EXPECT_NEAR(z, 1.0 / 3.0, 0.05) << nu;
        }
    }
}

TEST(Cli, MedianFigureDeterministicSvg) {
    const auto dir = temp_dir();
    const auto a = (dir / "a.svg").string();
    const auto b = (dir / "b.svg").string();
    ASSERT_EQ(run("median-figure --points 50 --deterministic -o /dev/null --svg " + a).status, 0);
    ASSERT_EQ(run("median-figure --points 50 --deterministic -o /dev/null --svg " + b).status, 0);
    std::ifstream fa(a), fb(b);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    EXPECT_NE(sa.str().find("<svg"), std::string::npos);
    EXPECT_EQ(sa.str(), sb.str());
    fs::remove_all(dir);
}

TEST(Cli, ExperimentWritesOutputs) {
    const auto dir = temp_dir();
    const auto cfg = dir / "c.cfg";
    std::ofstream(cfg) << "model: {type: poisson, intensity: 50}\nreplications: 4\nmedian: {cells_per_side: [3]}\n";
    const auto out = dir / "out";
    const auto r = run("experiment " + cfg.string() + " --output-dir " + out.string() + " --workers 2");
    ASSERT_EQ(r.status, 0);
    EXPECT_TRUE(fs::exists(out / "records.csv"));
    EXPECT_TRUE(fs::exists(out / "aggregates.csv"));
    EXPECT_TRUE(fs::exists(out / "manifest.json"));
    EXPECT_EQ(r.out.substr(0, 6), "model,");
    fs::remove_all(dir);
}

TEST(Cli, InvalidInputsFail) {
    EXPECT_NE(run("simulate --model banana").status, 0);
    EXPECT_NE(run("simulate --n -1").status, 0);
    EXPECT_NE(run("estimate /nonexistent/file").status, 0);
    EXPECT_NE(run("median-figure --nu-min 0").status, 0);
    EXPECT_NE(run("no-such-command").status, 0);

    const auto dir = temp_dir();
    const auto cfg = dir / "bad.cfg";
    std::ofstream(cfg) << "model: {type: poisson, intensity: 50}\nmedian: {cells_per_side: [1]}\n";
    EXPECT_EQ(run("experiment " + cfg.string() + " --output-dir " + (dir / "o").string()).status, 1);
    fs::remove_all(dir);
}
