#include "medint/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace medint {

namespace {

constexpr int kBoundaryEdge = -1;

struct Vertex {
    double x;
    double y;
    int edge;  ///< label of the edge leaving this vertex: site index or kBoundaryEdge
};

using Polygon = std::vector<Vertex>;

// Keeps the part of `poly` where (p - mid) . normal <= 0. Edges created along
// the clip line receive `label`.
void clip(Polygon& poly, Polygon& scratch, double mx, double my, double nx, double ny, int label) {
    scratch.clear();
    const std::size_t n = poly.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Vertex& a = poly[k];
        const Vertex& b = poly[(k + 1) % n];
        const double da = (a.x - mx) * nx + (a.y - my) * ny;
        const double db = (b.x - mx) * nx + (b.y - my) * ny;
        const bool a_in = da <= 0.0;
        const bool b_in = db <= 0.0;
        if (a_in) {
            if (b_in) {
                scratch.push_back(a);
            } else {
                const double t = da / (da - db);
                scratch.push_back(a);
                scratch.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), label});
            }
        } else if (b_in) {
            const double t = da / (da - db);
            scratch.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.edge});
        }
    }
    poly.swap(scratch);
}

double polygon_area(const Polygon& poly) {
    double twice = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Vertex& a = poly[k];
        const Vertex& b = poly[(k + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * std::abs(twice);
}

}  // namespace

NearestSiteIndex::NearestSiteIndex(std::span<const std::array<double, 2>> sites, const Window& window)
    : sites_(sites), lo_x_(window.lower(0)), lo_y_(window.lower(1)) {
    if (sites.empty()) {
        throw std::invalid_argument("nearest-site index needs at least one site");
    }
    cells_ = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(sites.size())))),
                                     1, 1024);
    cell_ = window.side() / static_cast<double>(cells_);
    std::vector<std::size_t> bucket(sites.size());
    start_.assign(cells_ * cells_ + 1, 0);
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const auto cx = std::min(cells_ - 1, static_cast<std::size_t>(std::max(0.0, (sites[i][0] - lo_x_) / cell_)));
        const auto cy = std::min(cells_ - 1, static_cast<std::size_t>(std::max(0.0, (sites[i][1] - lo_y_) / cell_)));
        bucket[i] = cy * cells_ + cx;
        ++start_[bucket[i] + 1];
    }
    std::partial_sum(start_.begin(), start_.end(), start_.begin());
    members_.resize(sites.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < sites.size(); ++i) {
        members_[fill[bucket[i]]++] = i;
    }
}

std::size_t NearestSiteIndex::nearest(double x, double y) const {
    const auto n = static_cast<std::ptrdiff_t>(cells_);
    const auto cx = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::floor((x - lo_x_) / cell_)), 0, n - 1);
    const auto cy = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::floor((y - lo_y_) / cell_)), 0, n - 1);
    std::size_t best = std::numeric_limits<std::size_t>::max();
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::ptrdiff_t ring = 0; ring < n; ++ring) {
        for (std::ptrdiff_t gy = cy - ring; gy <= cy + ring; ++gy) {
            if (gy < 0 || gy >= n) {
                continue;
            }
            const bool edge_row = gy == cy - ring || gy == cy + ring;
            const std::ptrdiff_t step = edge_row ? 1 : 2 * ring;
            for (std::ptrdiff_t gx = cx - ring; gx <= cx + ring; gx += std::max<std::ptrdiff_t>(step, 1)) {
                if (gx < 0 || gx >= n) {
                    continue;
                }
                const auto cell = static_cast<std::size_t>(gy * n + gx);
                for (std::size_t k = start_[cell]; k < start_[cell + 1]; ++k) {
                    const std::size_t i = members_[k];
                    const double dx = sites_[i][0] - x;
                    const double dy = sites_[i][1] - y;
                    const double d2 = dx * dx + dy * dy;
                    if (d2 < best_d2 || (d2 == best_d2 && i < best)) {
                        best_d2 = d2;
                        best = i;
                    }
                }
            }
        }
        // Sites beyond this ring are at least ring * cell away.
        const double reach = static_cast<double>(ring) * cell_;
        if (best != std::numeric_limits<std::size_t>::max() && reach * reach > best_d2) {
            break;
        }
    }
    return best;
}

VoronoiDiagram voronoi_cell_areas(const PointPattern& pattern) {
    if (pattern.dim() != 2) {
        throw std::invalid_argument("Voronoi tessellation is planar only");
    }
    if (pattern.empty()) {
        throw std::invalid_argument("Voronoi tessellation needs at least one point");
    }
    const Window& w = pattern.window();

    // Merge exact duplicates.
    std::vector<std::size_t> order(pattern.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto pa = pattern[a];
        const auto pb = pattern[b];
        return pa[0] < pb[0] || (pa[0] == pb[0] && (pa[1] < pb[1] || (pa[1] == pb[1] && a < b)));
    });
    VoronoiDiagram diagram;
    diagram.site_of_point.resize(pattern.size());
    for (const auto i : order) {
        const auto p = pattern[i];
        if (diagram.sites.empty() || diagram.sites.back()[0] != p[0] || diagram.sites.back()[1] != p[1]) {
            diagram.sites.push_back({p[0], p[1]});
        }
        diagram.site_of_point[i] = diagram.sites.size() - 1;
    }

    const auto& sites = diagram.sites;
    const std::size_t m = sites.size();
    diagram.areas.resize(m);
    diagram.border.resize(m);

    const NearestSiteIndex index(sites, w);
    const auto n = static_cast<std::ptrdiff_t>(index.cells_);
    Polygon poly;
    Polygon scratch;
    for (std::size_t i = 0; i < m; ++i) {
        const double px = sites[i][0];
        const double py = sites[i][1];
        poly = {{w.lower(0), w.lower(1), kBoundaryEdge},
                {w.upper(0), w.lower(1), kBoundaryEdge},
                {w.upper(0), w.upper(1), kBoundaryEdge},
                {w.lower(0), w.upper(1), kBoundaryEdge}};
        const auto cx = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>((px - index.lo_x_) / index.cell_), 0, n - 1);
        const auto cy = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>((py - index.lo_y_) / index.cell_), 0, n - 1);
        for (std::ptrdiff_t ring = 0; ring < n; ++ring) {
            for (std::ptrdiff_t gy = cy - ring; gy <= cy + ring; ++gy) {
                if (gy < 0 || gy >= n) {
                    continue;
                }
                const bool edge_row = gy == cy - ring || gy == cy + ring;
                const std::ptrdiff_t step = edge_row ? 1 : std::max<std::ptrdiff_t>(2 * ring, 1);
                for (std::ptrdiff_t gx = cx - ring; gx <= cx + ring; gx += step) {
                    if (gx < 0 || gx >= n) {
                        continue;
                    }
                    const auto cell = static_cast<std::size_t>(gy * n + gx);
                    for (std::size_t k = index.start_[cell]; k < index.start_[cell + 1]; ++k) {
                        const std::size_t j = index.members_[k];
                        if (j == i) {
                            continue;
                        }
                        const double qx = sites[j][0];
                        const double qy = sites[j][1];
                        clip(poly, scratch, 0.5 * (px + qx), 0.5 * (py + qy), qx - px, qy - py, static_cast<int>(j));
                    }
                }
            }
            // A site can only cut the cell if it is closer than twice the
            // farthest vertex; unseen sites are at least ring * cell away.
            double reach2 = 0.0;
            for (const auto& v : poly) {
                reach2 = std::max(reach2, (v.x - px) * (v.x - px) + (v.y - py) * (v.y - py));
            }
            const double unseen = static_cast<double>(ring) * index.cell_;
            if (unseen * unseen >= 4.0 * reach2) {
                break;
            }
        }
        diagram.areas[i] = polygon_area(poly);
        diagram.border[i] = std::any_of(poly.begin(), poly.end(), [](const Vertex& v) { return v.edge == kBoundaryEdge; });
    }
    return diagram;
}

std::vector<EstimatorResult> estimate_voronoi(const PointPattern& pattern, int grid_per_side,
                                              std::span<const double> trim_fs) {
    if (grid_per_side < 1) {
        throw std::invalid_argument("grid_per_side must be >= 1");
    }
    for (const double f : trim_fs) {
        if (!(f >= 0.0 && f < 0.5)) {
            throw std::invalid_argument("trim fraction must lie in [0, 0.5)");
        }
    }
    if (pattern.empty()) {
        throw std::runtime_error("no interior cells");
    }
    const VoronoiDiagram diagram = voronoi_cell_areas(pattern);
    const NearestSiteIndex index(diagram.sites, pattern.window());
    const Window& w = pattern.window();
    const double step = w.side() / grid_per_side;

    std::vector<std::size_t> hits(diagram.sites.size(), 0);
    for (int iy = 0; iy < grid_per_side; ++iy) {
        const double y = w.lower(1) + (iy + 0.5) * step;
        for (int ix = 0; ix < grid_per_side; ++ix) {
            const double x = w.lower(0) + (ix + 0.5) * step;
            ++hits[index.nearest(x, y)];
        }
    }
    std::vector<double> inverse_areas;
    std::vector<std::size_t> counts;
    for (std::size_t s = 0; s < diagram.sites.size(); ++s) {
        if (!diagram.border[s] && hits[s] > 0) {
            inverse_areas.push_back(1.0 / diagram.areas[s]);
            counts.push_back(hits[s]);
        }
    }
    if (counts.empty()) {
        throw std::runtime_error("no interior cells");
    }
    std::vector<EstimatorResult> out;
    out.reserve(trim_fs.size());
    for (const double f : trim_fs) {
        EstimatorResult r;
        r.id = EstimatorId::Voronoi;
        r.grid_per_side = grid_per_side;
        r.trim = f;
        r.value = trimmed_mean_weighted(inverse_areas, counts, f);
        out.push_back(r);
    }
    return out;
}

EstimatorResult estimate_voronoi(const PointPattern& pattern, int grid_per_side, double trim_f) {
    const double fs[] = {trim_f};
    return estimate_voronoi(pattern, grid_per_side, std::span<const double>(fs)).front();
}

}  // namespace medint
