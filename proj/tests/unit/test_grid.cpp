#include <gtest/gtest.h>

#include <cmath>

#include "volpath/error.hpp"
#include "volpath/grid.hpp"

using namespace volpath;

TEST(TimeGrid, UniformContainsRequiredNodes) {
    auto g = make_grid(1.0, 500, {0.1234567, 0.5, 1.0 / 3.0});
    EXPECT_EQ(g->front(), 0.0);
    EXPECT_EQ(g->back(), 1.0);
    EXPECT_TRUE(g->find(0.1234567).has_value());
    EXPECT_TRUE(g->find(1.0 / 3.0).has_value());
    EXPECT_EQ((*g)[g->index_of(0.5)], 0.5);
    for (std::size_t i = 1; i < g->size(); ++i) EXPECT_GT((*g)[i], (*g)[i - 1]);
}

TEST(TimeGrid, NearbyRequiredNodeIsSnapped) {
    auto g = make_grid(1.0, 500, {0.2 + 1e-12});
    EXPECT_EQ(g->size(), 501u);
    EXPECT_EQ((*g)[100], 0.2 + 1e-12);
}

TEST(TimeGrid, IndexOfOffGridThrows) {
    auto g = make_grid(1.0, 10);
    try {
        g->index_of(0.123);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::grid_mismatch);
    }
    EXPECT_EQ(g->lower_index(0.15), 2u);
}

TEST(TimeGrid, RejectsNonIncreasing) {
    EXPECT_THROW(TimeGrid({0.0, 0.5, 0.5, 1.0}), Error);
}

TEST(TimeGrid, ShiftedIsExactOnDyadicNodes) {
    auto g = make_grid(1.0, 512);
    auto s = g->shifted(0.125);
    EXPECT_EQ(s.front(), -0.125);
    EXPECT_EQ(s[64], 0.0);
    EXPECT_EQ(s.back(), 0.875);
}

TEST(PathSample, ConcatenationIsExactAtNodes) {
    auto g = make_grid(1.0, 10);
    PathSample a = PathSample::from_function(g, 2, [](double s, std::size_t k) { return s + k; });
    PathSample b(g, 2, -1.0);
    auto c = concatenate(a, b, 0.4);
    for (std::size_t i = 0; i < g->size(); ++i)
        for (std::size_t k = 0; k < 2; ++k) {
            if ((*g)[i] < 0.4)
                EXPECT_EQ(c(i, k), a(i, k));
            else
                EXPECT_EQ(c(i, k), -1.0);
        }
}

TEST(PathSample, SegmentsMustMeet) {
    auto g1 = std::make_shared<const TimeGrid>(std::vector<double>{0.0, 0.25, 0.5});
    auto g2 = std::make_shared<const TimeGrid>(std::vector<double>{0.5, 0.75, 1.0});
    auto g3 = std::make_shared<const TimeGrid>(std::vector<double>{0.6, 1.0});
    PathSample h(g1, 1, 2.0), th(g2, 1, 5.0), bad(g3, 1, 5.0);
    auto c = concatenate_segments(h, th, 0.5);
    EXPECT_EQ(c(1, 0), 2.0);
    EXPECT_EQ(c(2, 0), 5.0);
    EXPECT_EQ(c(4, 0), 5.0);
    EXPECT_EQ(c.size(), 5u);
    EXPECT_THROW(concatenate_segments(h, bad, 0.5), Error);
}

TEST(PathSample, Axpy) {
    auto g = make_grid(1.0, 4);
    PathSample a(g, 1, 1.0), b(g, 1, 2.0);
    auto c = axpy(a, 0.5, b);
    for (double v : c.values) EXPECT_EQ(v, 2.0);
    auto other = make_grid(1.0, 8);
    EXPECT_THROW(axpy(a, 1.0, PathSample(other, 1, 0.0)), Error);
}
