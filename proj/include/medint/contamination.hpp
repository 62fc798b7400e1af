#pragma once

#include <string>
#include <variant>

#include "medint/geometry.hpp"
#include "medint/random.hpp"

namespace medint {

/// Setting (A): the pattern is observed as simulated.
struct PureSetting {};

/// Setting (B): round(rho * m) uniform points added in a random square of side n/5.
struct AddSetting {
    double rho = 0.0;
};

/// Setting (C): points removed from four corner squares of total area rho * |W|.
struct DeleteSetting {
    double rho = 0.0;
};

using ContaminationConfig = std::variant<PureSetting, AddSetting, DeleteSetting>;

/// "A", "B" or "C".
std::string setting_label(const ContaminationConfig& setting);
/// Contamination fraction (0 for the pure setting).
double setting_rho(const ContaminationConfig& setting);
void validate(const ContaminationConfig& setting);

PointPattern contaminate_add(const PointPattern& pattern, RandomStream& stream, double rho);
PointPattern contaminate_delete(const PointPattern& pattern, double rho);
/// The stream overload exists for a uniform call shape; deletion is deterministic.
PointPattern contaminate_delete(const PointPattern& pattern, RandomStream& stream, double rho);

PointPattern contaminate(const PointPattern& pattern, const ContaminationConfig& setting, RandomStream& stream);

}  // namespace medint
