#pragma once

#include <iosfwd>
#include <string>

#include "medint/experiment.hpp"
#include "medint/geometry.hpp"

namespace medint {

/// Header `# dim=2 n=<half_side> count=<m>`, then one `x y` line per point
/// with 17 significant digits.
void write_pattern(std::ostream& out, const PointPattern& pattern);
void write_pattern_file(const std::string& path, const PointPattern& pattern);
/// Throws std::runtime_error with the offending line number on malformed input.
PointPattern read_pattern(std::istream& in);
PointPattern read_pattern_file(const std::string& path);

/// rep,n,setting,rho,estimator,param,value,seconds
void write_records_csv(std::ostream& out, const ExperimentReport& report);
/// model,n,setting,rho,estimator,param,mean,sd,bias,mse,gain_pct
void write_aggregates_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

/// Shortest round-trip decimal representation of v ("nan" for NaN).
std::string format_double(double v);

}  // namespace medint
