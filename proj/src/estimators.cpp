#include "medint/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace medint {

std::string to_string(EstimatorId id) {
    switch (id) {
        case EstimatorId::Standard:
            return "std";
        case EstimatorId::MedianJ:
            return "medianJ";
        case EstimatorId::MedianJ2:
            return "medianJ2";
        case EstimatorId::Voronoi:
            return "voronoi";
    }
    return "unknown";
}

JitterFunction JitterFunction::power(double exponent) {
    if (!(exponent > 0.0) || !std::isfinite(exponent)) {
        throw std::invalid_argument("jitter power exponent must be > 0");
    }
    if (exponent == 1.0) {
        return identity();
    }
    return JitterFunction(Kind::Power, exponent);
}

JitterFunction JitterFunction::parse(const std::string& text) {
    if (text == "identity" || text == "t") {
        return identity();
    }
    if (text == "sqrt") {
        return sqrt();
    }
    if (text.rfind("power:", 0) == 0) {
        const std::string arg = text.substr(6);
        std::size_t used = 0;
        double p = 0.0;
        try {
            p = std::stod(arg, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != arg.size()) {
            throw std::invalid_argument("bad jitter exponent in '" + text + "'");
        }
        return power(p);
    }
    throw std::invalid_argument("unknown jitter function '" + text + "' (expected identity, sqrt or power:<p>)");
}

std::string JitterFunction::name() const {
    switch (kind_) {
        case Kind::Identity:
            return "identity";
        case Kind::Sqrt:
            return "sqrt";
        case Kind::Power: {
            std::string s = std::to_string(exponent_);
            s.erase(s.find_last_not_of('0') + 1);
            if (!s.empty() && s.back() == '.') {
                s.pop_back();
            }
            return "power:" + s;
        }
    }
    return "unknown";
}

double JitterFunction::phi(double t) const {
    switch (kind_) {
        case Kind::Identity:
            return t;
        case Kind::Sqrt:
            return std::sqrt(t);
        case Kind::Power:
            return std::pow(t, exponent_);
    }
    return t;
}

double JitterFunction::inverse(double u) const {
    switch (kind_) {
        case Kind::Identity:
            return u;
        case Kind::Sqrt:
            return u * u;
        case Kind::Power:
            return std::pow(u, 1.0 / exponent_);
    }
    return u;
}

double JitterFunction::derivative(double t) const {
    switch (kind_) {
        case Kind::Identity:
            return 1.0;
        case Kind::Sqrt:
            return 0.5 / std::sqrt(t);
        case Kind::Power:
            return exponent_ * std::pow(t, exponent_ - 1.0);
    }
    return 1.0;
}

double sample_quantile(std::span<const double> values, double p) {
    if (values.empty()) {
        throw std::invalid_argument("sample_quantile of an empty sample");
    }
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("quantile order must lie in (0, 1)");
    }
    const auto n = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9 * n));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    std::vector<double> copy(values.begin(), values.end());
    auto nth = copy.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(copy.begin(), nth, copy.end());
    return *nth;
}

double trimmed_mean(std::span<const double> values, double f) {
    if (!(f >= 0.0 && f < 0.5)) {
        throw std::invalid_argument("trim fraction must lie in [0, 0.5)");
    }
    const auto cut = static_cast<std::size_t>(std::floor(f * static_cast<double>(values.size())));
    if (values.size() <= 2 * cut || values.empty()) {
        throw std::invalid_argument("trimmed mean of an empty sample");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto first = sorted.begin() + static_cast<std::ptrdiff_t>(cut);
    const auto last = sorted.end() - static_cast<std::ptrdiff_t>(cut);
    return std::accumulate(first, last, 0.0) / static_cast<double>(last - first);
}

double trimmed_mean_weighted(std::span<const double> values, std::span<const std::size_t> counts, double f) {
    if (values.size() != counts.size()) {
        throw std::invalid_argument("values and counts differ in length");
    }
    if (!(f >= 0.0 && f < 0.5)) {
        throw std::invalid_argument("trim fraction must lie in [0, 0.5)");
    }
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[a] < values[b] || (values[a] == values[b] && a < b);
    });
    const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    const auto cut = static_cast<std::size_t>(std::floor(f * static_cast<double>(total)));
    if (total <= 2 * cut || total == 0) {
        throw std::invalid_argument("trimmed mean of an empty sample");
    }
    // Keep ranks [cut, total - cut) of the expanded sample.
    const std::size_t keep_end = total - cut;
    std::size_t rank = 0;
    double sum = 0.0;
    for (const auto i : order) {
        const std::size_t lo = std::max(rank, cut);
        const std::size_t hi = std::min(rank + counts[i], keep_end);
        if (hi > lo) {
            sum += values[i] * static_cast<double>(hi - lo);
        }
        rank += counts[i];
    }
    return sum / static_cast<double>(keep_end - cut);
}

EstimatorResult estimate_std(const PointPattern& pattern) {
    EstimatorResult r;
    r.id = EstimatorId::Standard;
    r.value = static_cast<double>(pattern.size()) / pattern.window().volume();
    return r;
}

JitteredSample jitter_counts(std::span<const long> counts, double cell_volume, const JitterFunction& phi,
                             RandomStream& stream) {
    if (!(cell_volume > 0.0)) {
        throw std::invalid_argument("cell volume must be > 0");
    }
    JitteredSample sample;
    sample.cell_volume = cell_volume;
    sample.z_values.reserve(counts.size());
    for (const long n : counts) {
        if (n < 0) {
            throw std::invalid_argument("cell counts must be non-negative");
        }
        sample.z_values.push_back(static_cast<double>(n) + phi.inverse(stream.uniform_open()));
    }
    return sample;
}

double median_intensity(const JitteredSample& sample) {
    return sample_quantile(sample.z_values, 0.5) / sample.cell_volume;
}

EstimatorResult estimate_medianJ(const PointPattern& pattern, int cells_per_side, const JitterFunction& phi,
                                 RandomStream& stream) {
    const Tessellation tess = make_tessellation(pattern.window(), cells_per_side);
    const auto counts = count_per_cell(pattern, tess);
    EstimatorResult r;
    r.id = EstimatorId::MedianJ;
    r.cells = tess.cell_count();
    r.seed = stream.seed();
    r.stream_index = stream.stream_index();
    r.value = median_intensity(jitter_counts(counts, tess.cell_volume(), phi, stream));
    return r;
}

EstimatorResult estimate_medianJ2(const PointPattern& pattern, int cells_per_side, const JitterFunction& phi,
                                  RandomStream& stream) {
    EstimatorResult r = estimate_medianJ(pattern, cells_per_side, phi, stream);
    const double cell_volume = pattern.window().volume() / static_cast<double>(r.cells);
    r.id = EstimatorId::MedianJ2;
    r.value -= 1.0 / (3.0 * cell_volume);
    return r;
}

}  // namespace medint
