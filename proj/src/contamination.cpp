#include "medint/contamination.hpp"

#include <cmath>
#include <stdexcept>

namespace medint {

namespace {

void check_rho(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw std::invalid_argument("contamination fraction rho must lie in (0, 1)");
    }
}

void check_planar(const PointPattern& pattern) {
    if (pattern.dim() != 2) {
        throw std::invalid_argument("contamination is defined for planar patterns");
    }
}

}  // namespace

std::string setting_label(const ContaminationConfig& setting) {
    switch (setting.index()) {
        case 0:
            return "A";
        case 1:
            return "B";
        default:
            return "C";
    }
}

double setting_rho(const ContaminationConfig& setting) {
    if (const auto* add = std::get_if<AddSetting>(&setting)) {
        return add->rho;
    }
    if (const auto* del = std::get_if<DeleteSetting>(&setting)) {
        return del->rho;
    }
    return 0.0;
}

void validate(const ContaminationConfig& setting) {
    if (!std::holds_alternative<PureSetting>(setting)) {
        check_rho(setting_rho(setting));
    }
}

PointPattern contaminate_add(const PointPattern& pattern, RandomStream& stream, double rho) {
    check_rho(rho);
    check_planar(pattern);
    const Window& w = pattern.window();
    const double side = w.half_side() / 5.0;
    const auto extra = static_cast<std::size_t>(std::llround(rho * static_cast<double>(pattern.size())));

    PointPattern out = pattern;
    if (extra == 0) {
        return out;
    }
    // Lower-left corner uniform over positions keeping the square inside W.
    const double x0 = w.lower(0) + (w.side() - side) * stream.uniform();
    const double y0 = w.lower(1) + (w.side() - side) * stream.uniform();
    out.reserve(pattern.size() + extra);
    for (std::size_t k = 0; k < extra; ++k) {
        out.add_unchecked(x0 + side * stream.uniform(), y0 + side * stream.uniform());
    }
    return out;
}

PointPattern contaminate_delete(const PointPattern& pattern, double rho) {
    check_rho(rho);
    check_planar(pattern);
    const Window& w = pattern.window();
    // Four squares of side n * sqrt(rho): 4 (n sqrt(rho))^2 = rho (2n)^2.
    const double side = w.half_side() * std::sqrt(rho);
    const auto in_corner = [&](double v, int axis) { return v < w.lower(axis) + side || v > w.upper(axis) - side; };

    PointPattern out(w);
    out.reserve(pattern.size());
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        const auto p = pattern[i];
        if (!(in_corner(p[0], 0) && in_corner(p[1], 1))) {
            out.add_unchecked(p[0], p[1]);
        }
    }
    return out;
}

PointPattern contaminate_delete(const PointPattern& pattern, RandomStream& /*stream*/, double rho) {
    return contaminate_delete(pattern, rho);
}

PointPattern contaminate(const PointPattern& pattern, const ContaminationConfig& setting, RandomStream& stream) {
    if (const auto* add = std::get_if<AddSetting>(&setting)) {
        return contaminate_add(pattern, stream, add->rho);
    }
    if (const auto* del = std::get_if<DeleteSetting>(&setting)) {
        return contaminate_delete(pattern, del->rho);
    }
    return pattern;
}

}  // namespace medint
