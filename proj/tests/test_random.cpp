#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "medint/random.hpp"

using namespace medint;

TEST(RandomStream, SameSeedAndIndexReplays) {
    auto a = substream(42, 0);
    auto b = substream(42, 0);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(a.uniform(), b.uniform());
    }
}

TEST(RandomStream, DifferentIndicesDiffer) {
    auto a = substream(42, 0);
    auto b = substream(42, 1);
    EXPECT_NE(a.uniform(), b.uniform());
}

TEST(RandomStream, DeriveIgnoresConsumption) {
    auto a = substream(3, 9);
    const auto child_before = a.derive(17);
    for (int i = 0; i < 50; ++i) {
        a();
    }
    auto c1 = child_before;
    auto c2 = a.derive(17);
    EXPECT_EQ(c1(), c2());
    auto other = a.derive(18);
    auto c3 = a.derive(17);
    EXPECT_NE(other(), c3());
}

TEST(RandomStream, UniformRange) {
    auto s = substream(1, 0);
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        const double v = s.uniform_open();
        ASSERT_GT(v, 0.0);
        ASSERT_LT(v, 1.0);
    }
}

TEST(RandomStream, BelowIsUnbiased) {
    auto s = substream(2, 0);
    std::vector<int> hist(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        ++hist[s.below(7)];
    }
    // Each bucket ~ Binomial(n, 1/7); 5 sd band.
    const double sd = std::sqrt(n * (1.0 / 7) * (6.0 / 7));
    for (const int h : hist) {
        EXPECT_NEAR(h, n / 7.0, 5 * sd);
    }
}

TEST(RandomStream, NormalMoments) {
    auto s = substream(4, 0);
    const int n = 200000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        sum += z;
        sum2 += z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 5.0 / std::sqrt(n));
    EXPECT_NEAR(sum2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(RandomStream, PoissonMoments) {
    auto s = substream(6, 0);
    const int n = 50000;
    for (const double mean : {0.3, 4.0, 400.0}) {
        double sum = 0, sum2 = 0;
        for (int i = 0; i < n; ++i) {
            const double k = static_cast<double>(s.poisson(mean));
            sum += k;
            sum2 += k * k;
        }
        const double m = sum / n;
        const double var = sum2 / n - m * m;
        EXPECT_NEAR(m, mean, 5 * std::sqrt(mean / n));
        EXPECT_NEAR(var / mean, 1.0, 0.05);
    }
    EXPECT_EQ(s.poisson(0.0), 0u);
    EXPECT_THROW(s.poisson(-1.0), std::invalid_argument);
}

// Batch means of 1000 substreams: pairwise correlation between neighbouring
// streams' means must be statistically indistinguishable from zero.
TEST(RandomStream, SubstreamsUncorrelated) {
    const int streams = 1000;
    const int samples = 10000;
    std::vector<double> means(streams);
    std::vector<double> firsts(streams);
    for (int k = 0; k < streams; ++k) {
        auto s = substream(42, static_cast<std::uint64_t>(k));
        double sum = 0.0;
        for (int i = 0; i < samples; ++i) {
            const double u = s.uniform();
            if (i == 0) {
                firsts[k] = u;
            }
            sum += u;
        }
        means[k] = sum / samples;
    }
    // Correlation of (mean_k, mean_{k+1}) over pairs; under independence its sd is 1/sqrt(pairs).
    double mx = 0, my = 0;
    const int pairs = streams - 1;
    for (int k = 0; k < pairs; ++k) {
        mx += means[k];
        my += means[k + 1];
    }
    mx /= pairs;
    my /= pairs;
    double sxy = 0, sxx = 0, syy = 0;
    for (int k = 0; k < pairs; ++k) {
        sxy += (means[k] - mx) * (means[k + 1] - my);
        sxx += (means[k] - mx) * (means[k] - mx);
        syy += (means[k + 1] - my) * (means[k + 1] - my);
    }
    const double r = sxy / std::sqrt(sxx * syy);
    EXPECT_LT(std::abs(r), 4.0 / std::sqrt(pairs));
    // Batch means themselves have the uniform's variance 1/12 / samples.
    double v = 0;
    for (const double m : means) {
        v += (m - 0.5) * (m - 0.5);
    }
    v /= streams;
    EXPECT_NEAR(v * samples * 12.0, 1.0, 0.2);
    EXPECT_EQ(std::set<double>(firsts.begin(), firsts.end()).size(), firsts.size());
}

TEST(RandomStream, DifferentSeedsDiffer) {
    auto a = substream(1, 0);
    auto b = substream(2, 0);
    EXPECT_NE(a(), b());
}
