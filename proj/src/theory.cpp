#include "medint/theory.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "medint/parallel.hpp"

namespace medint {

namespace {

constexpr std::uint64_t kSimulationTag = 0x51;
constexpr std::uint64_t kJitterTag = 0x7177;

double sample_variance(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (const double x : v) {
        ss += (x - mean) * (x - mean);
    }
    return ss / (n - 1.0);
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

bool is_cox(const ModelConfig& model) { return !std::holds_alternative<HardCoreModel>(model); }

}  // namespace

double poisson_pmf(long k, double nu) {
    if (k < 0) {
        return 0.0;
    }
    if (nu == 0.0) {
        return k == 0 ? 1.0 : 0.0;
    }
    const auto kd = static_cast<double>(k);
    return std::exp(kd * std::log(nu) - nu - std::lgamma(kd + 1.0));
}

double poisson_cdf(long k, double nu) {
    if (k < 0) {
        return 0.0;
    }
    if (nu == 0.0) {
        return 1.0;
    }
    return boost::math::gamma_q(static_cast<double>(k) + 1.0, nu);
}

long poisson_median(double nu) {
    if (!(nu >= 0.0) || !std::isfinite(nu)) {
        throw std::invalid_argument("Poisson mean must be finite and >= 0");
    }
    auto k = static_cast<long>(std::floor(nu));
    while (k > 0 && poisson_cdf(k - 1, nu) >= 0.5) {
        --k;
    }
    while (poisson_cdf(k, nu) < 0.5) {
        ++k;
    }
    return k;
}

double jittered_cdf(double nu, double t, const JitterFunction& phi) {
    if (t < 0.0) {
        return 0.0;
    }
    const double whole = std::floor(t);
    const auto k = static_cast<long>(whole);
    return poisson_cdf(k - 1, nu) + poisson_pmf(k, nu) * phi.phi(t - whole);
}

double jittered_density(double nu, double t, const JitterFunction& phi) {
    if (t < 0.0) {
        return 0.0;
    }
    const double whole = std::floor(t);
    return poisson_pmf(static_cast<long>(whole), nu) * phi.derivative(t - whole);
}

TheoreticalMedianReport exact_jittered_median(double nu, const JitterFunction& phi) {
    if (!(nu > 0.0)) {
        throw std::invalid_argument("exact_jittered_median needs nu > 0");
    }
    TheoreticalMedianReport r;
    r.mean = nu;
    r.integer_median = poisson_median(nu);
    // F_Z(m) = P(N <= m-1) < 1/2 <= P(N <= m) = F_Z(m+1), so the median lies
    // in [m, m+1] and solves P(N <= m-1) + P(N = m) phi(t - m) = 1/2.
    const long m = r.integer_median;
    const double below = poisson_cdf(m - 1, nu);
    const double mass = poisson_pmf(m, nu);
    const double level = std::clamp((0.5 - below) / mass, 0.0, 1.0);
    r.jittered_median = static_cast<double>(m) + phi.inverse(level);
    r.offset = r.jittered_median - nu;
    return r;
}

std::string to_string(SigmaSquared::Method method) {
    return method == SigmaSquared::Method::Analytic ? "analytic" : "monte_carlo";
}

double lgcp_pair_correlation_integral(double variance, double scale, double* error) {
    if (!(variance > 0.0) || !(scale > 0.0)) {
        throw std::invalid_argument("lgcp covariance parameters must be > 0");
    }
    // In units of the scale: int_0^inf 2 pi r (exp(variance e^{-r}) - 1) dr, times scale^2.
    const auto integrand = [variance](double r) { return 2.0 * std::numbers::pi * r * std::expm1(variance * std::exp(-r)); };
    boost::math::quadrature::exp_sinh<double> integrator;
    double err = 0.0;
    double l1 = 0.0;
    std::size_t levels = 0;
    const double value = integrator.integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), 1e-10, &err, &l1,
                                              &levels);
    if (!std::isfinite(value) || err > 1e-6 * std::abs(value)) {
        throw std::runtime_error("pair correlation quadrature did not converge");
    }
    if (error != nullptr) {
        *error = err * scale * scale;
    }
    return value * scale * scale;
}

SigmaSquared sigma_squared(const ModelConfig& model, const SigmaMonteCarloOptions& mc) {
    validate(model);
    SigmaSquared s;
    s.model = model_name(model);
    if (const auto* p = std::get_if<PoissonModel>(&model)) {
        s.value = p->intensity;
        return s;
    }
    if (const auto* l = std::get_if<LgcpModel>(&model)) {
        double err = 0.0;
        const double integral = lgcp_pair_correlation_integral(l->variance, l->scale, &err);
        s.value = l->intensity + l->intensity * l->intensity * integral;
        s.error = l->intensity * l->intensity * err;
        return s;
    }
    if (const auto* t = std::get_if<ThomasModel>(&model)) {
        // g(r) - 1 = exp(-r^2 / (4 sigma^2)) / (4 pi kappa sigma^2) integrates to 1 / kappa.
        const double lambda = t->alpha * t->kappa;
        s.value = lambda + lambda * lambda / t->kappa;
        return s;
    }
    return sigma_squared_monte_carlo(model, mc);
}

SigmaSquared sigma_squared_monte_carlo(const ModelConfig& model, const SigmaMonteCarloOptions& mc) {
    if (mc.replications < 10) {
        throw std::invalid_argument("Monte Carlo sigma^2 needs at least 10 replications");
    }
    const Window window = Window::square(mc.half_side);
    const Simulator simulator(model, window);
    constexpr std::size_t kSizes = 4;
    std::array<double, kSizes> half{};
    for (std::size_t j = 0; j < kSizes; ++j) {
        half[j] = mc.half_side * static_cast<double>(j + 1) / static_cast<double>(kSizes);
    }
    std::vector<std::array<double, kSizes>> counts(mc.replications);
    parallel_for(mc.replications, mc.workers, [&](std::size_t r) {
        RandomStream stream = substream(mc.seed, r).derive(kSimulationTag);
        const PointPattern pattern = simulator.simulate(stream);
        std::array<double, kSizes> c{};
        for (std::size_t i = 0; i < pattern.size(); ++i) {
            const auto p = pattern[i];
            const double extent = std::max(std::abs(p[0]), std::abs(p[1]));
            for (std::size_t j = 0; j < kSizes; ++j) {
                if (extent <= half[j]) {
                    c[j] += 1.0;
                }
            }
        }
        counts[r] = c;
    });

    // Least squares for Var = b |C| + c sqrt|C|.
    double saa = 0.0, sab = 0.0, sbb = 0.0, sav = 0.0, sbv = 0.0;
    std::array<double, kSizes> var{};
    for (std::size_t j = 0; j < kSizes; ++j) {
        std::vector<double> column(mc.replications);
        for (std::size_t r = 0; r < mc.replications; ++r) {
            column[r] = counts[r][j];
        }
        var[j] = sample_variance(column);
        const double area = 4.0 * half[j] * half[j];
        const double root = std::sqrt(area);
        saa += area * area;
        sab += area * root;
        sbb += root * root;
        sav += area * var[j];
        sbv += root * var[j];
    }
    const double det = saa * sbb - sab * sab;
    SigmaSquared s;
    s.model = model_name(model);
    s.method = SigmaSquared::Method::MonteCarlo;
    s.value = (sav * sbb - sbv * sab) / det;
    // Rough standard error from the largest square: Var has relative sd sqrt(2 / (R - 1)).
    const double largest_area = 4.0 * half.back() * half.back();
    s.error = var.back() / largest_area * std::sqrt(2.0 / static_cast<double>(mc.replications - 1));
    return s;
}

double gain(double mse_std, double mse_other) {
    if (!(mse_std > 0.0)) {
        throw std::invalid_argument("gain needs a positive reference MSE");
    }
    return (mse_std - mse_other) / mse_std * 100.0;
}

MedianBiasBound median_bias_bound(double sigma2, double cell_volume, bool cox, double epsilon) {
    if (!(cell_volume > 0.0) || !(sigma2 >= 0.0)) {
        throw std::invalid_argument("median_bias_bound needs c_n > 0 and sigma^2 >= 0");
    }
    MedianBiasBound b;
    b.epsilon = epsilon;
    // |Me_Z - lambda c| <= 1/2 + sqrt(1/12) + (1 + eps) sigma sqrt(c), divided by c.
    b.intensity_bound = (0.5 + std::sqrt(1.0 / 12.0)) / cell_volume +
                        (1.0 + epsilon) * std::sqrt(sigma2) / std::sqrt(cell_volume);
    if (cox) {
        b.count_bound = 4.0 / 3.0;
    }
    return b;
}

MedianBiasBound median_bias_bound(const ModelConfig& model, double cell_volume, double epsilon) {
    return median_bias_bound(sigma_squared(model).value, cell_volume, is_cox(model), epsilon);
}

std::vector<CltDiagnostic> clt_diagnostics(const ModelConfig& model, const CltOptions& options) {
    validate(model);
    if (options.replications < 2) {
        throw std::invalid_argument("clt_diagnostics needs at least 2 replications");
    }
    const auto explicit_intensity = model_intensity(model);
    const std::optional<double> lambda_opt = explicit_intensity ? explicit_intensity : options.reference_intensity;
    if (!lambda_opt) {
        throw std::invalid_argument("clt_diagnostics needs a reference intensity for this model");
    }
    const double lambda = *lambda_opt;
    const double sigma2 = options.sigma2 ? *options.sigma2 : sigma_squared(model).value;
    const bool poisson = std::holds_alternative<PoissonModel>(model);
    const JitterFunction identity = JitterFunction::identity();
    const double z_crit =
        boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + 0.5 * options.confidence);

    std::vector<CltDiagnostic> out;
    for (const double n : options.half_sides) {
        const Window window = Window::square(n);
        const Tessellation tess = make_tessellation(window, options.cells_per_side);
        const Simulator simulator(model, window);
        const std::size_t k = tess.cell_count();
        const double c = tess.cell_volume();

        std::vector<std::vector<double>> z(options.replications);
        std::vector<std::vector<long>> counts(options.replications);
        std::vector<double> est_std(options.replications);
        parallel_for(options.replications, options.workers, [&](std::size_t r) {
            const RandomStream base = substream(options.seed, r);
            RandomStream sim = base.derive(kSimulationTag);
            const PointPattern pattern = simulator.simulate(sim);
            counts[r] = count_per_cell(pattern, tess);
            RandomStream jitter = base.derive(kJitterTag + static_cast<std::uint64_t>(options.cells_per_side));
            z[r] = jitter_counts(counts[r], c, identity, jitter).z_values;
            est_std[r] = estimate_std(pattern).value;
        });

        CltDiagnostic d;
        d.half_side = n;
        d.cells = k;
        d.cell_volume = c;
        d.intensity = lambda;
        d.sigma2 = sigma2;
        const auto target_count = static_cast<long>(std::floor(lambda * c));
        if (poisson) {
            d.median_z = exact_jittered_median(lambda * c, identity).jittered_median;
            d.median_exact = true;
            d.scaled_pmf = std::sqrt(c) * poisson_pmf(target_count, lambda * c);
            d.pmf_exact = true;
        } else {
            std::vector<double> pooled;
            pooled.reserve(k * options.replications);
            std::size_t hits = 0;
            for (std::size_t r = 0; r < options.replications; ++r) {
                pooled.insert(pooled.end(), z[r].begin(), z[r].end());
                hits += static_cast<std::size_t>(std::count(counts[r].begin(), counts[r].end(), target_count));
            }
            d.median_z = sample_quantile(pooled, 0.5);
            d.scaled_pmf = std::sqrt(c) * static_cast<double>(hits) / static_cast<double>(pooled.size());
        }
        d.scaled_pmf_target = 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma2);

        std::vector<double> ecdf_stat(options.replications);
        std::vector<double> est_j(options.replications);
        std::vector<double> scaled(options.replications);
        const double root_volume = std::sqrt(window.volume());
        const double half_width = z_crit * std::sqrt(std::numbers::pi * sigma2 / 2.0) / root_volume;
        std::size_t covered = 0;
        for (std::size_t r = 0; r < options.replications; ++r) {
            const auto below = std::count_if(z[r].begin(), z[r].end(), [&](double v) { return v <= d.median_z; });
            const double ecdf = static_cast<double>(below) / static_cast<double>(k);
            ecdf_stat[r] = std::sqrt(static_cast<double>(k)) * (ecdf - 0.5);
            est_j[r] = sample_quantile(z[r], 0.5) / c;
            scaled[r] = root_volume * (est_j[r] - lambda);
            if (std::abs(est_j[r] - lambda) <= half_width) {
                ++covered;
            }
        }
        d.ecdf_variance = sample_variance(ecdf_stat);
        d.scaled_variance = sample_variance(scaled);
        d.scaled_variance_target = std::numbers::pi * sigma2 / 2.0;
        d.variance_ratio = sample_variance(est_j) / sample_variance(est_std);
        d.coverage = static_cast<double>(covered) / static_cast<double>(options.replications);
        d.mean_j = mean_of(est_j);
        d.mean_std = mean_of(est_std);
        out.push_back(d);
    }
    return out;
}

}  // namespace medint
