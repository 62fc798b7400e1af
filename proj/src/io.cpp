#include "medint/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace medint {

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[40];
    for (int digits = 15; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        if (std::strtod(buf, nullptr) == v) {
            break;
        }
    }
    return buf;
}

void write_pattern(std::ostream& out, const PointPattern& pattern) {
    if (pattern.dim() != 2) {
        throw std::invalid_argument("pattern files are planar");
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "# dim=2 n=%.17g count=%zu\n", pattern.window().half_side(), pattern.size());
    out << buf;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        const auto p = pattern[i];
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p[0], p[1]);
        out << buf;
    }
}

void write_pattern_file(const std::string& path, const PointPattern& pattern) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    write_pattern(out, pattern);
    if (!out) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

PointPattern read_pattern(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("pattern file is empty");
    }
    int dim = 0;
    double half_side = 0.0;
    std::size_t count = 0;
    if (std::sscanf(line.c_str(), "# dim=%d n=%lf count=%zu", &dim, &half_side, &count) != 3) {
        throw std::runtime_error("line 1: expected header '# dim=2 n=<half_side> count=<m>'");
    }
    if (dim != 2) {
        throw std::runtime_error("line 1: only dim=2 patterns are supported");
    }
    PointPattern pattern(Window::square(half_side));
    pattern.reserve(count);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream fields(line);
        double x = 0.0;
        double y = 0.0;
        std::string extra;
        if (!(fields >> x >> y) || (fields >> extra)) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected two coordinates");
        }
        try {
            pattern.add(x, y);
        } catch (const std::out_of_range&) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": point outside the window");
        }
    }
    if (pattern.size() != count) {
        throw std::runtime_error("header announces " + std::to_string(count) + " points but file has " +
                                 std::to_string(pattern.size()));
    }
    return pattern;
}

PointPattern read_pattern_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    return read_pattern(in);
}

void write_records_csv(std::ostream& out, const ExperimentReport& report) {
    out << "rep,n,setting,rho,estimator,param,value,seconds\n";
    for (const auto& r : report.records) {
        out << r.rep << ',' << format_double(r.half_side) << ',' << r.setting << ',' << format_double(r.rho) << ','
            << to_string(r.estimator) << ',' << r.param() << ',' << format_double(r.value) << ','
            << format_double(r.seconds) << '\n';
    }
}

void write_aggregates_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
    out << "model,n,setting,rho,estimator,param,mean,sd,bias,mse,gain_pct\n";
    for (const auto& a : rows) {
        out << a.model << ',' << format_double(a.half_side) << ',' << a.setting << ',' << format_double(a.rho) << ','
            << to_string(a.estimator) << ',' << a.param << ',' << format_double(a.mean) << ',' << format_double(a.sd)
            << ',' << format_double(a.bias) << ',' << format_double(a.mse) << ','
            << (a.gain ? format_double(*a.gain) : std::string("")) << '\n';
    }
}

}  // namespace medint
