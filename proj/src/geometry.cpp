#include "medint/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace medint {

Window::Window(int dim, double half_side) : dim_(dim), half_side_(half_side) {
    if (dim < 1) {
        throw std::invalid_argument("window dimension must be >= 1");
    }
    if (!(half_side > 0.0) || !std::isfinite(half_side)) {
        throw std::invalid_argument("window half side must be a positive finite number");
    }
    volume_ = std::pow(2.0 * half_side, dim);
    center_.assign(static_cast<std::size_t>(dim), 0.0);
}

Window Window::translated(std::span<const double> shift) const {
    if (static_cast<int>(shift.size()) != dim_) {
        throw std::invalid_argument("shift dimension does not match window");
    }
    Window w = *this;
    for (std::size_t a = 0; a < shift.size(); ++a) {
        w.center_[a] += shift[a];
    }
    return w;
}

bool Window::contains(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) {
        return false;
    }
    for (std::size_t a = 0; a < x.size(); ++a) {
        if (!(x[a] >= center_[a] - half_side_ && x[a] <= center_[a] + half_side_)) {
            return false;
        }
    }
    return true;
}

void PointPattern::add(std::span<const double> x) {
    if (!window_.contains(x)) {
        throw std::out_of_range("point outside the observation window");
    }
    coords_.insert(coords_.end(), x.begin(), x.end());
}

void PointPattern::add(double x, double y) {
    const std::array<double, 2> p{x, y};
    add(std::span<const double>(p));
}

Tessellation::Tessellation(Window window, int cells_per_side)
    : window_(window), cells_per_side_(cells_per_side) {
    if (cells_per_side < 1) {
        throw std::invalid_argument("cells_per_side must be >= 1");
    }
    cell_count_ = 1;
    for (int a = 0; a < window_.dim(); ++a) {
        cell_count_ *= static_cast<std::size_t>(cells_per_side);
    }
    cell_side_ = window_.side() / cells_per_side;
    cell_volume_ = window_.volume() / static_cast<double>(cell_count_);
}

double Tessellation::cell_lower(std::size_t index, int axis) const {
    std::size_t j = index;
    for (int a = 0; a < axis; ++a) {
        j /= static_cast<std::size_t>(cells_per_side_);
    }
    j %= static_cast<std::size_t>(cells_per_side_);
    return window_.lower(axis) + static_cast<double>(j) * cell_side_;
}

std::size_t Tessellation::cell_of(std::span<const double> x) const {
    const auto s = static_cast<std::size_t>(cells_per_side_);
    std::size_t index = 0;
    std::size_t stride = 1;
    for (int a = 0; a < window_.dim(); ++a) {
        const double u = (x[static_cast<std::size_t>(a)] - window_.lower(a)) / cell_side_;
        auto j = static_cast<std::ptrdiff_t>(std::floor(u));
        j = std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(s) - 1);
        index += static_cast<std::size_t>(j) * stride;
        stride *= s;
    }
    return index;
}

Tessellation make_tessellation(const Window& window, int cells_per_side) {
    return Tessellation(window, cells_per_side);
}

std::vector<long> count_per_cell(const PointPattern& pattern, const Tessellation& tess) {
    if (!(pattern.window() == tess.window())) {
        throw std::invalid_argument("pattern window does not match tessellation window");
    }
    std::vector<long> counts(tess.cell_count(), 0);
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        ++counts[tess.cell_of(pattern[i])];
    }
    return counts;
}

}  // namespace medint
