#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "medint/estimators.hpp"
#include "medint/geometry.hpp"

namespace medint {

/// Voronoi tessellation of a planar pattern clipped to its window.
struct VoronoiDiagram {
    /// Distinct sites; exact duplicates in the input are merged.
    std::vector<std::array<double, 2>> sites;
    std::vector<double> areas;
    /// True when the closed cell meets the window boundary.
    std::vector<bool> border;
    /// Input point index -> site index.
    std::vector<std::size_t> site_of_point;

    double area_of_point(std::size_t i) const { return areas[site_of_point[i]]; }
    bool border_of_point(std::size_t i) const { return border[site_of_point[i]]; }
};

VoronoiDiagram voronoi_cell_areas(const PointPattern& pattern);

/// Index of the site nearest to `q`; ties go to the lowest site index.
class NearestSiteIndex {
public:
    NearestSiteIndex(std::span<const std::array<double, 2>> sites, const Window& window);
    std::size_t nearest(double x, double y) const;

private:
    std::span<const std::array<double, 2>> sites_;
    double lo_x_;
    double lo_y_;
    double cell_;
    std::size_t cells_;
    std::vector<std::size_t> start_;
    std::vector<std::size_t> members_;

    friend VoronoiDiagram voronoi_cell_areas(const PointPattern& pattern);
};

/// Trimmed mean of inverse Voronoi cell areas sampled at a regular dummy grid,
/// ignoring dummy points whose nearest site owns a border cell.
/// Throws std::runtime_error("no interior cells") when nothing is left.
EstimatorResult estimate_voronoi(const PointPattern& pattern, int grid_per_side, double trim_f);

/// Same estimator for several trim fractions sharing one diagram.
std::vector<EstimatorResult> estimate_voronoi(const PointPattern& pattern, int grid_per_side,
                                              std::span<const double> trim_fs);

}  // namespace medint
