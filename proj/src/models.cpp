#include "medint/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace medint {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char* message) {
    if (!ok) {
        throw std::invalid_argument(message);
    }
}

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

Window require_planar(const Window& window) {
    require(window.dim() == 2, "point process simulation is planar only");
    return window;
}

// Offspring of a cluster process: parents on the window dilated by `margin`,
// offspring displaced by `displace` and kept only inside the window.
template <class Displace>
PointPattern simulate_cluster(double kappa, double alpha, double margin, const Window& window, RandomStream& stream,
                              Displace&& displace) {
    require_planar(window);
    PointPattern out(window);
    if (alpha == 0.0) {
        return out;
    }
    const double lo_x = window.lower(0) - margin;
    const double lo_y = window.lower(1) - margin;
    const double side = window.side() + 2.0 * margin;
    const auto parents = stream.poisson(kappa * side * side);
    out.reserve(static_cast<std::size_t>(alpha * kappa * window.volume() * 1.2) + 8);
    for (std::uint64_t p = 0; p < parents; ++p) {
        const double cx = lo_x + side * stream.uniform();
        const double cy = lo_y + side * stream.uniform();
        const auto offspring = stream.poisson(alpha);
        for (std::uint64_t k = 0; k < offspring; ++k) {
            const auto [dx, dy] = displace(stream);
            const double x = cx + dx;
            const double y = cy + dy;
            if (x >= window.lower(0) && x <= window.upper(0) && y >= window.lower(1) && y <= window.upper(1)) {
                out.add_unchecked(x, y);
            }
        }
    }
    return out;
}

// Point storage for the birth-death chain with a uniform grid of cells whose
// side is at least the hard-core radius, so conflicts are found in the 3x3
// neighbourhood of a cell.
class HardCoreState {
public:
    HardCoreState(double lo, double side, double radius) : lo_(lo), radius2_(radius * radius) {
        cells_ = radius > 0.0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(side / radius))) : 1;
        cells_ = std::min<std::size_t>(cells_, 4096);
        inv_cell_ = static_cast<double>(cells_) / side;
        grid_.resize(cells_ * cells_);
        check_ = radius > 0.0;
    }

    std::size_t size() const { return xs_.size(); }

    bool conflicts(double x, double y) const {
        if (!check_) {
            return false;
        }
        const auto [cx, cy] = cell_xy(x, y);
        const std::size_t x0 = cx > 0 ? cx - 1 : 0;
        const std::size_t y0 = cy > 0 ? cy - 1 : 0;
        const std::size_t x1 = std::min(cx + 1, cells_ - 1);
        const std::size_t y1 = std::min(cy + 1, cells_ - 1);
        for (std::size_t gy = y0; gy <= y1; ++gy) {
            for (std::size_t gx = x0; gx <= x1; ++gx) {
                for (const auto i : grid_[gy * cells_ + gx]) {
                    const double dx = xs_[i] - x;
                    const double dy = ys_[i] - y;
                    if (dx * dx + dy * dy < radius2_) {
                        return true;
                    }
                }
            }
        }
        return false;
    }

    void insert(double x, double y) {
        const auto [cx, cy] = cell_xy(x, y);
        const std::size_t cell = cy * cells_ + cx;
        const auto i = static_cast<std::uint32_t>(xs_.size());
        xs_.push_back(x);
        ys_.push_back(y);
        cell_of_.push_back(cell);
        slot_of_.push_back(grid_[cell].size());
        grid_[cell].push_back(i);
    }

    void erase(std::size_t i) {
        auto& cell = grid_[cell_of_[i]];
        const std::size_t slot = slot_of_[i];
        const std::uint32_t moved_in_cell = cell.back();
        cell[slot] = moved_in_cell;
        slot_of_[moved_in_cell] = slot;
        cell.pop_back();

        const std::size_t last = xs_.size() - 1;
        if (i != last) {
            xs_[i] = xs_[last];
            ys_[i] = ys_[last];
            cell_of_[i] = cell_of_[last];
            slot_of_[i] = slot_of_[last];
            grid_[cell_of_[i]][slot_of_[i]] = static_cast<std::uint32_t>(i);
        }
        xs_.pop_back();
        ys_.pop_back();
        cell_of_.pop_back();
        slot_of_.pop_back();
    }

    double x(std::size_t i) const { return xs_[i]; }
    double y(std::size_t i) const { return ys_[i]; }

private:
    std::pair<std::size_t, std::size_t> cell_xy(double x, double y) const {
        const auto clamp = [this](double u) {
            const auto c = static_cast<std::ptrdiff_t>(std::floor(u));
            return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(c, 0, static_cast<std::ptrdiff_t>(cells_) - 1));
        };
        return {clamp((x - lo_) * inv_cell_), clamp((y - lo_) * inv_cell_)};
    }

    double lo_;
    double radius2_;
    bool check_;
    std::size_t cells_;
    double inv_cell_;
    std::vector<std::vector<std::uint32_t>> grid_;
    std::vector<double> xs_;
    std::vector<double> ys_;
    std::vector<std::size_t> cell_of_;
    std::vector<std::size_t> slot_of_;
};

}  // namespace

LgcpModel LgcpModel::from_intensity(double intensity, double variance, double scale, double spacing) {
    LgcpModel m;
    m.intensity = intensity;
    m.variance = variance;
    m.scale = scale;
    m.spacing = spacing;
    m.mean = std::log(intensity) - 0.5 * variance;
    return m;
}

std::uint64_t HardCoreModel::effective_steps(const Window& observed) const {
    if (mh_steps > 0) {
        return mh_steps;
    }
    const double side = observed.side() + 2.0 * effective_margin();
    const double expected = beta * side * side;
    return 100000ull * static_cast<std::uint64_t>(std::max(1.0, std::ceil(expected / 400.0)));
}

void validate(const ModelConfig& model) {
    std::visit(Overloaded{
                   [](const PoissonModel& m) {
                       require(m.intensity >= 0.0 && std::isfinite(m.intensity), "poisson: lambda must be >= 0");
                   },
                   [](const LgcpModel& m) {
                       require(positive(m.variance), "lgcp: variance must be > 0");
                       require(positive(m.scale), "lgcp: scale must be > 0");
                       require(positive(m.intensity), "lgcp: lambda must be > 0");
                       require(m.spacing >= 0.0, "lgcp: spacing must be >= 0");
                       const double implied = std::exp(m.mean + 0.5 * m.variance);
                       require(std::abs(implied - m.intensity) <= 1e-9 * m.intensity,
                               "lgcp: mean inconsistent with lambda = exp(mean + variance / 2)");
                   },
                   [](const ThomasModel& m) {
                       require(positive(m.kappa), "thomas: kappa must be > 0");
                       require(m.alpha >= 0.0 && std::isfinite(m.alpha), "thomas: alpha must be >= 0");
                       require(positive(m.sigma), "thomas: sigma must be > 0");
                   },
                   [](const MaternClusterModel& m) {
                       require(positive(m.kappa), "matern: kappa must be > 0");
                       require(m.alpha >= 0.0 && std::isfinite(m.alpha), "matern: alpha must be >= 0");
                       require(positive(m.sigma), "matern: sigma must be > 0");
                   },
                   [](const HardCoreModel& m) {
                       require(positive(m.beta), "phc: beta must be > 0");
                       require(m.radius >= 0.0 && std::isfinite(m.radius), "phc: hard-core radius must be >= 0");
                   },
               },
               model);
}

std::string model_name(const ModelConfig& model) {
    return std::visit(Overloaded{
                          [](const PoissonModel&) { return std::string("poisson"); },
                          [](const LgcpModel&) { return std::string("lgcp"); },
                          [](const ThomasModel&) { return std::string("thomas"); },
                          [](const MaternClusterModel&) { return std::string("matern"); },
                          [](const HardCoreModel&) { return std::string("phc"); },
                      },
                      model);
}

std::optional<double> model_intensity(const ModelConfig& model) {
    return std::visit(Overloaded{
                          [](const PoissonModel& m) -> std::optional<double> { return m.intensity; },
                          [](const LgcpModel& m) -> std::optional<double> { return m.intensity; },
                          [](const ThomasModel& m) -> std::optional<double> { return m.alpha * m.kappa; },
                          [](const MaternClusterModel& m) -> std::optional<double> { return m.alpha * m.kappa; },
                          [](const HardCoreModel&) -> std::optional<double> { return std::nullopt; },
                      },
                      model);
}

PointPattern simulate_poisson(double intensity, const Window& window, RandomStream& stream) {
    require(intensity >= 0.0 && std::isfinite(intensity), "poisson: lambda must be >= 0");
    require_planar(window);
    PointPattern out(window);
    const auto count = stream.poisson(intensity * window.volume());
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const double x = window.lower(0) + window.side() * stream.uniform();
        const double y = window.lower(1) + window.side() * stream.uniform();
        out.add_unchecked(x, y);
    }
    return out;
}

PointPattern simulate_lgcp(const GaussianFieldSampler& sampler, const Window& window, RandomStream& stream) {
    require_planar(window);
    const GridField field = sampler.sample(stream);
    const double h = field.spacing;

    // Pixel rectangles clipped to the window; the last row/column may overhang.
    std::vector<double> cumulative(field.values.size());
    double total = 0.0;
    for (std::size_t iy = 0; iy < field.ny; ++iy) {
        const double hy = std::min(window.upper(1), field.y(iy) + 0.5 * h) - (field.y(iy) - 0.5 * h);
        for (std::size_t ix = 0; ix < field.nx; ++ix) {
            const double hx = std::min(window.upper(0), field.x(ix) + 0.5 * h) - (field.x(ix) - 0.5 * h);
            total += std::exp(field.at(ix, iy)) * std::max(0.0, hx) * std::max(0.0, hy);
            cumulative[iy * field.nx + ix] = total;
        }
    }

    // Independent per-pixel Poisson counts are equivalent to a Poisson total
    // allocated multinomially in proportion to the pixel masses.
    PointPattern out(window);
    const auto count = stream.poisson(total);
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const double target = stream.uniform() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
        if (it == cumulative.end()) {
            --it;
        }
        const auto pixel = static_cast<std::size_t>(it - cumulative.begin());
        const std::size_t ix = pixel % field.nx;
        const std::size_t iy = pixel / field.nx;
        const double x0 = field.x(ix) - 0.5 * h;
        const double y0 = field.y(iy) - 0.5 * h;
        const double x1 = std::min(window.upper(0), x0 + h);
        const double y1 = std::min(window.upper(1), y0 + h);
        out.add_unchecked(x0 + (x1 - x0) * stream.uniform(), y0 + (y1 - y0) * stream.uniform());
    }
    return out;
}

PointPattern simulate_lgcp(const LgcpModel& model, const Window& window, RandomStream& stream) {
    validate(model);
    const GaussianFieldSampler sampler(window, model.effective_spacing(), model.mean,
                                       ExponentialCovariance(model.variance, model.scale));
    return simulate_lgcp(sampler, window, stream);
}

PointPattern simulate_neyman_scott(const ThomasModel& model, const Window& window, RandomStream& stream) {
    validate(model);
    const double sigma = model.sigma;
    return simulate_cluster(model.kappa, model.alpha, 6.0 * sigma, window, stream, [sigma](RandomStream& s) {
        const auto [a, b] = s.normal_pair();
        return std::pair{sigma * a, sigma * b};
    });
}

PointPattern simulate_neyman_scott(const MaternClusterModel& model, const Window& window, RandomStream& stream) {
    validate(model);
    const double r = model.radius();
    return simulate_cluster(model.kappa, model.alpha, r, window, stream, [r](RandomStream& s) {
        double u, v;
        do {
            u = 2.0 * s.uniform() - 1.0;
            v = 2.0 * s.uniform() - 1.0;
        } while (u * u + v * v > 1.0);
        return std::pair{r * u, r * v};
    });
}

PointPattern simulate_phc(const HardCoreModel& model, const Window& window, RandomStream& stream) {
    validate(model);
    require_planar(window);
    const double margin = model.effective_margin();
    const double lo = window.lower(0) - margin;
    const double lo_y = window.lower(1) - margin;
    const double side = window.side() + 2.0 * margin;
    const double area = side * side;
    const double birth_scale = model.beta * area;
    const std::uint64_t steps = model.effective_steps(window);

    // Both axes share one grid; offset y so that it starts at `lo` as well.
    const double shift_y = lo - lo_y;
    HardCoreState state(lo, side, model.radius);

    for (std::uint64_t step = 0; step < steps; ++step) {
        if (stream.uniform() < 0.5) {
            const double x = lo + side * stream.uniform();
            const double y = lo + side * stream.uniform();
            const double ratio = birth_scale / static_cast<double>(state.size() + 1);
            if (ratio < 1.0 && stream.uniform() >= ratio) {
                continue;
            }
            if (!state.conflicts(x, y)) {
                state.insert(x, y);
            }
        } else if (state.size() > 0) {
            const auto i = static_cast<std::size_t>(stream.below(state.size()));
            const double ratio = static_cast<double>(state.size()) / birth_scale;
            if (ratio >= 1.0 || stream.uniform() < ratio) {
                state.erase(i);
            }
        }
    }

    PointPattern out(window);
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double x = state.x(i);
        const double y = state.y(i) - shift_y;
        if (x >= window.lower(0) && x <= window.upper(0) && y >= window.lower(1) && y <= window.upper(1)) {
            out.add_unchecked(x, y);
        }
    }
    return out;
}

Simulator::Simulator(ModelConfig model, const Window& window) : model_(std::move(model)), window_(window) {
    validate(model_);
    require_planar(window_);
    if (const auto* lgcp = std::get_if<LgcpModel>(&model_)) {
        field_ = std::make_unique<GaussianFieldSampler>(window_, lgcp->effective_spacing(), lgcp->mean,
                                                        ExponentialCovariance(lgcp->variance, lgcp->scale));
    }
}

Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

PointPattern Simulator::simulate(RandomStream& stream) const {
    return std::visit(Overloaded{
                          [&](const PoissonModel& m) { return simulate_poisson(m.intensity, window_, stream); },
                          [&](const LgcpModel&) { return simulate_lgcp(*field_, window_, stream); },
                          [&](const ThomasModel& m) { return simulate_neyman_scott(m, window_, stream); },
                          [&](const MaternClusterModel& m) { return simulate_neyman_scott(m, window_, stream); },
                          [&](const HardCoreModel& m) { return simulate_phc(m, window_, stream); },
                      },
                      model_);
}

}  // namespace medint
