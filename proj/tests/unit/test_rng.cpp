#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "volpath/parallel.hpp"
#include "volpath/rng.hpp"

using namespace volpath;

// Known-answer vectors published with Random123.
TEST(Philox, KnownAnswers) {
    auto a = philox4x32({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(a, (PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    auto b = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(b, (PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    auto c = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(c, (PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, UniformOpenInterval) {
    EXPECT_GT(uniform_open(0), 0.0);
    EXPECT_LT(uniform_open(~0ull), 1.0);
}

TEST(Normals, Moments) {
    const std::size_t n = 200000;
    std::vector<double> z(2 * n);
    fill_normal_pairs(99, 0, 0, n, z.data());
    double m1 = 0, m2 = 0, m4 = 0;
    for (double x : z) {
        m1 += x;
        m2 += x * x;
        m4 += x * x * x * x;
    }
    const double N = static_cast<double>(z.size());
    m1 /= N;
    m2 /= N;
    m4 /= N;
    EXPECT_NEAR(m1, 0.0, 4.0 / std::sqrt(N));
    EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt(2.0 / N));
    EXPECT_NEAR(m4, 3.0, 4.0 * std::sqrt(96.0 / N));
}

TEST(Normals, RandomAccessMatchesSequential) {
    std::vector<double> all(40), part(10);
    fill_normal_pairs(5, 17, 0, 20, all.data());
    fill_normal_pairs(5, 17, 7, 5, part.data());
    for (int i = 0; i < 10; ++i) EXPECT_EQ(part[i], all[14 + i]);
}

TEST(Normals, StreamsDiffer) {
    std::vector<double> a(8), b(8), c(8);
    fill_normal_pairs(5, 0, 0, 4, a.data());
    fill_normal_pairs(5, 1, 0, 4, b.data());
    fill_normal_pairs(6, 0, 0, 4, c.data());
    EXPECT_NE(a, b);
    EXPECT_NE(a, c);
}

TEST(DeriveSeed, Distinct) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(42, s));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_EQ(derive_seed(42, 3), derive_seed(42, 3));
    EXPECT_NE(derive_seed(42, 3), derive_seed(43, 3));
}

TEST(RunningStats, MergeMatchesSinglePass) {
    RunningStats all, a, b;
    for (int i = 0; i < 100; ++i) {
        const double x = std::sin(i * 0.7) + 0.01 * i;
        all.add(x);
        (i < 37 ? a : b).add(x);
    }
    a.merge(b);
    EXPECT_NEAR(a.mean, all.mean, 1e-14);
    EXPECT_NEAR(a.variance(), all.variance(), 1e-13);
    EXPECT_DOUBLE_EQ(a.n, 100.0);
}

TEST(RunSamples, IndependentOfWorkers) {
    auto factory = []() -> SampleFn {
        return [](std::uint64_t i, double* out, Diagnostics&) {
            double z[2];
            fill_normal_pairs(3, i, 0, 1, z);
            out[0] = z[0];
            out[1] = z[0] * z[1];
        };
    };
    auto one = run_samples(10000, 2, 1, factory, 256);
    auto four = run_samples(10000, 2, 4, factory, 256);
    auto nine = run_samples(10000, 2, 9, factory, 256);
    for (int k = 0; k < 2; ++k) {
        EXPECT_EQ(one.stats[k].mean, four.stats[k].mean);
        EXPECT_EQ(one.stats[k].m2, four.stats[k].m2);
        EXPECT_EQ(one.stats[k].mean, nine.stats[k].mean);
    }
}

TEST(ParallelFor, CoversEveryIndex) {
    std::vector<int> hit(1000, 0);
    parallel_for(hit.size(), 7, [&](std::size_t i) { hit[i] += 1; });
    for (int h : hit) EXPECT_EQ(h, 1);
}
