#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace medint {

/// Axis-aligned cubic observation window, [-n, n]^dim unless translated.
class Window {
public:
    Window(int dim, double half_side);

    /// Planar window [-n, n]^2.
    static Window square(double half_side) { return Window(2, half_side); }

    /// Same window shifted by `shift` (one entry per axis).
    Window translated(std::span<const double> shift) const;

    int dim() const { return dim_; }
    double half_side() const { return half_side_; }
    double side() const { return 2.0 * half_side_; }
    double center(int axis = 0) const { return center_[static_cast<std::size_t>(axis)]; }
    double lower(int axis = 0) const { return center(axis) - half_side_; }
    double upper(int axis = 0) const { return center(axis) + half_side_; }
    double volume() const { return volume_; }

    /// Closed-box membership.
    bool contains(std::span<const double> x) const;

    bool operator==(const Window& other) const = default;

private:
    int dim_;
    double half_side_;
    double volume_;
    std::vector<double> center_;
};

/// Finite set of points inside a window. Coordinates are stored row-major.
class PointPattern {
public:
    explicit PointPattern(Window window) : window_(window) {}

    const Window& window() const { return window_; }
    int dim() const { return window_.dim(); }
    std::size_t size() const { return coords_.size() / static_cast<std::size_t>(window_.dim()); }
    bool empty() const { return coords_.empty(); }

    std::span<const double> operator[](std::size_t i) const {
        const auto d = static_cast<std::size_t>(window_.dim());
        return {coords_.data() + i * d, d};
    }

    /// Appends a point; throws std::out_of_range if it lies outside the window.
    void add(std::span<const double> x);
    void add(double x, double y);

    /// Appends without the window check. Caller guarantees containment.
    void add_unchecked(double x, double y) {
        coords_.push_back(x);
        coords_.push_back(y);
    }

    void reserve(std::size_t n) { coords_.reserve(n * static_cast<std::size_t>(window_.dim())); }
    const std::vector<double>& coords() const { return coords_; }

private:
    Window window_;
    std::vector<double> coords_;
};

/// Grid of s^dim equal cubic cells covering a window.
///
/// Cells are half-open [lo, hi) along each axis, except that the window's
/// upper faces belong to the last cell. Every point of the closed window is
/// therefore assigned to exactly one cell.
class Tessellation {
public:
    Tessellation(Window window, int cells_per_side);

    const Window& window() const { return window_; }
    int cells_per_side() const { return cells_per_side_; }
    std::size_t cell_count() const { return cell_count_; }
    double cell_volume() const { return cell_volume_; }
    double cell_side() const { return cell_side_; }

    /// Lower corner of cell `index` along `axis`.
    double cell_lower(std::size_t index, int axis) const;

    /// Linear cell index of a point inside the window.
    std::size_t cell_of(std::span<const double> x) const;

private:
    Window window_;
    int cells_per_side_;
    std::size_t cell_count_;
    double cell_side_;
    double cell_volume_;
};

Tessellation make_tessellation(const Window& window, int cells_per_side);

/// Number of points per cell, indexed like Tessellation::cell_of.
std::vector<long> count_per_cell(const PointPattern& pattern, const Tessellation& tess);

}  // namespace medint
