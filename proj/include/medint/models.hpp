#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "medint/gaussian_field.hpp"
#include "medint/geometry.hpp"
#include "medint/random.hpp"

namespace medint {

struct PoissonModel {
    double intensity = 0.0;
};

/// Log-Gaussian Cox process with exponential covariance. The field mean is
/// fixed by the target intensity: mean = log(intensity) - variance / 2.
struct LgcpModel {
    double variance = 0.0;
    double scale = 0.0;
    double intensity = 0.0;
    double mean = 0.0;
    /// Field pixel spacing; 0 selects scale / 2.
    double spacing = 0.0;

    static LgcpModel from_intensity(double intensity, double variance, double scale, double spacing = 0.0);
    double effective_spacing() const { return spacing > 0.0 ? spacing : 0.5 * scale; }
};

/// Neyman-Scott process with Gaussian(0, sigma^2 I) offspring displacement.
struct ThomasModel {
    double kappa = 0.0;
    double alpha = 0.0;
    double sigma = 0.0;
};

/// Neyman-Scott process with offspring uniform on the disc of radius sigma^2.
struct MaternClusterModel {
    double kappa = 0.0;
    double alpha = 0.0;
    double sigma = 0.0;
    double radius() const { return sigma * sigma; }
};

/// Poisson process with activity beta conditioned on no pair closer than radius.
struct HardCoreModel {
    double beta = 0.0;
    double radius = 0.0;
    /// Birth-death iterations; 0 selects 1e5 * ceil(beta * |simulation window| / 400).
    std::uint64_t mh_steps = 0;
    /// Dilation of the simulation window before clipping; negative selects 2 * radius.
    double margin = -1.0;

    double effective_margin() const { return margin >= 0.0 ? margin : 2.0 * radius; }
    std::uint64_t effective_steps(const Window& observed) const;
};

using ModelConfig = std::variant<PoissonModel, LgcpModel, ThomasModel, MaternClusterModel, HardCoreModel>;

/// Throws std::invalid_argument when a parameter is out of range.
void validate(const ModelConfig& model);

/// Short identifier: poisson, lgcp, thomas, matern, phc.
std::string model_name(const ModelConfig& model);

/// Model intensity when it is explicit (empty for the hard-core process).
std::optional<double> model_intensity(const ModelConfig& model);

PointPattern simulate_poisson(double intensity, const Window& window, RandomStream& stream);
PointPattern simulate_lgcp(const LgcpModel& model, const Window& window, RandomStream& stream);
PointPattern simulate_neyman_scott(const ThomasModel& model, const Window& window, RandomStream& stream);
PointPattern simulate_neyman_scott(const MaternClusterModel& model, const Window& window, RandomStream& stream);
PointPattern simulate_phc(const HardCoreModel& model, const Window& window, RandomStream& stream);

/// Pattern simulator bound to one model and window. Precomputation (the LGCP
/// field spectrum) happens once in the constructor; simulate() is const and
/// may be called from several threads with distinct streams.
class Simulator {
public:
    Simulator(ModelConfig model, const Window& window);
    ~Simulator();
    Simulator(Simulator&&) noexcept;
    Simulator& operator=(Simulator&&) noexcept;

    PointPattern simulate(RandomStream& stream) const;
    const ModelConfig& model() const { return model_; }
    const Window& window() const { return window_; }

private:
    ModelConfig model_;
    Window window_;
    std::unique_ptr<GaussianFieldSampler> field_;
};

/// LGCP realisation given an already prepared field sampler.
PointPattern simulate_lgcp(const GaussianFieldSampler& sampler, const Window& window, RandomStream& stream);

}  // namespace medint
