#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <utility>

namespace medint {

/// Counter-based random stream (Philox4x32-10).
///
/// The key is the master seed; the upper half of the 128-bit counter holds the
/// stream index and the lower half counts blocks. Streams with different
/// indices therefore never overlap, and creating one is O(1).
/// Satisfies UniformRandomBitGenerator so it can drive <random> distributions.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t seed, std::uint64_t stream_index);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

    /// Independent child stream identified by `tag`. Deterministic in
    /// (seed, stream_index, tag) and unaffected by how much of this stream has
    /// been consumed.
    RandomStream derive(std::uint64_t tag) const;

    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on the open interval (0, 1).
    double uniform_open();
    /// Uniform on [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    /// Uniform integer on {0, ..., n-1}; n > 0.
    std::uint64_t below(std::uint64_t n);
    double normal();
    /// Two independent standard normals from one polar-method draw.
    std::pair<double, double> normal_pair();
    std::uint64_t poisson(double mean);

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_index_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffered_ = 0;
};

/// Stream `index` of the family keyed by `seed`.
RandomStream substream(std::uint64_t seed, std::uint64_t index);

/// SplitMix64 finalizer, used to derive stream identifiers.
std::uint64_t mix64(std::uint64_t x);

}  // namespace medint
