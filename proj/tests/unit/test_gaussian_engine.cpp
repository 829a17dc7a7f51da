#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "volpath/error.hpp"
#include "volpath/gaussian_engine.hpp"

using namespace volpath;

namespace {

std::vector<double> marginal(const GaussianBatch& b, std::size_t k) {
    std::vector<double> x(b.M);
    for (std::size_t p = 0; p < b.M; ++p) x[p] = b.J(p, k);
    return x;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double D = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        D = std::max(D, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return D;
}

}  // namespace

TEST(BuildWeights, ConstantKernelGivesConstantWeights) {
    auto g = make_grid(1.0, 50);
    for (auto spec : {KernelSpec::exponential(2.0, 0.0), KernelSpec::power_law(2.0, 0.5)}) {
        auto wt = build_weights(spec, g, 0.2, 0.6);
        for (std::size_t k = 1; k < wt.n_nodes; ++k) {
            for (std::size_t c = 0; c < k; ++c) EXPECT_NEAR(wt.weight(k, c)[0], 2.0, 1e-13);
            EXPECT_NEAR(wt.residual(k)[0], 0.0, 1e-6);
        }
    }
}

TEST(BuildWeights, SingularLastCellExceedsMidpoint) {
    auto g = make_grid(1.0, 100);
    auto spec = KernelSpec::power_law(1.0, 0.1);
    auto wt = build_weights(spec, g, 0.0, 1.0);
    for (std::size_t k : {1u, 10u, 100u}) {
        const double s = (*g)[k], a = (*g)[k - 1];
        const double w = wt.weight(k, k - 1)[0];
        EXPECT_NEAR(w, cell_integral(spec, s, a, s)(0, 0) / (s - a), 1e-12);
        EXPECT_GT(w, eval(spec, s, 0.5 * (a + s))(0, 0));
        // residual restores the exact variance of the cell
        const double r = wt.residual(k)[0];
        EXPECT_NEAR(r * r + (s - a) * w * w, covariance_entry(spec, s, s, a, s)(0, 0), 1e-12);
    }
}

TEST(Simulate, DegenerateCases) {
    auto g = make_grid(1.0, 20);
    auto b = simulate(KernelSpec::exponential(1, 1), g, 0.5, 0.5, 100, 3);
    for (double v : b.J_paths) EXPECT_EQ(v, 0.0);
    auto z = simulate(KernelSpec::zero(), g, 0.0, 1.0, 50, 3);
    for (double v : z.J_paths) EXPECT_EQ(v, 0.0);
    for (double v : z.I_paths) EXPECT_EQ(v, 0.0);
    auto e = simulate_exact(KernelSpec::zero(), g, 0.0, 1.0, 50, 3);
    for (double v : e.J_paths) EXPECT_EQ(v, 0.0);
}

TEST(Simulate, JEqualsIBeforeMaturity) {
    auto g = make_grid(1.0, 40);
    auto b = simulate(KernelSpec::power_law(1, 0.2), g, 0.25, 0.6, 200, 9);
    EXPECT_TRUE(b.shared_increments);
    const std::size_t kT = g->index_of(0.6) - g->index_of(0.25);
    bool differs_after = false;
    for (std::size_t p = 0; p < b.M; ++p)
        for (std::size_t k = 0; k < b.n_nodes; ++k) {
            if (k <= kT)
                EXPECT_EQ(b.J(p, k), b.I(p, k));
            else if (b.J(p, k) != b.I(p, k))
                differs_after = true;
        }
    EXPECT_TRUE(differs_after);
}

TEST(Simulate, ExponentialCovarianceMatchesClosedForm) {
    // M = 1e6 on a coarse grid keeps the batch within memory.
    auto g = make_grid(1.0, 10);
    auto spec = KernelSpec::exponential(1, 1);
    const double T = 0.6;
    auto b = simulate(spec, g, 0.0, T, 1000000, 2024);
    const std::vector<std::size_t> nodes{2, 4, 6, 8, 10};
    for (std::size_t a : nodes)
        for (std::size_t c : nodes) {
            double m = 0.0;
            for (std::size_t p = 0; p < b.M; ++p) m += b.J(p, a) * b.J(p, c);
            m /= static_cast<double>(b.M);
            const double sa = (*g)[a], sc = (*g)[c];
            const double want = covariance_entry(spec, sa, sc, 0.0, std::min({sa, sc, T}))(0, 0);
            EXPECT_NEAR(m, want, 5e-3) << sa << " " << sc;
        }
}

TEST(SimulateExact, Examples) {
    auto g = make_grid(1.0, 4);
    auto e = simulate_exact(KernelSpec::exponential(1, 1), g, 0.0, 1.0, 100000, 5);
    auto p = simulate_exact(KernelSpec::power_law(1, 0.1), g, 0.0, 1.0, 100000, 5);
    auto var = [](const GaussianBatch& b, std::size_t k) {
        double s = 0.0;
        for (std::size_t i = 0; i < b.M; ++i) s += b.J(i, k) * b.J(i, k);
        return s / b.M;
    };
    const double ve = (1 - std::exp(-2.0)) / 2;
    EXPECT_NEAR(var(e, 4), ve, 3 * ve * std::sqrt(2.0 / 1e5));
    EXPECT_NEAR(var(p, 4), 5.0, 3 * 5.0 * std::sqrt(2.0 / 1e5));
}

TEST(Simulate, KolmogorovSmirnovAgainstExact) {
    auto g = make_grid(1.0, 50);
    const double crit = std::sqrt(-std::log(1e-3 / 2) / 2) * std::sqrt(2.0 / 1e5);
    for (auto spec : {KernelSpec::power_law(1, 0.1), KernelSpec::exponential(1, 1)}) {
        auto a = simulate(spec, g, 0.0, 0.5, 100000, 11);
        auto b = simulate_exact(spec, g, 0.0, 0.5, 100000, 12);
        for (std::size_t k = 1; k < a.n_nodes; ++k) {
            const double D = ks_statistic(marginal(a, k), marginal(b, k));
            EXPECT_LT(D, crit) << "node " << k;
        }
    }
}

TEST(Simulate, ConvolutionTimeShiftInLaw) {
    auto g = make_grid(1.0, 64);
    auto spec = KernelSpec::power_law(1, 0.2);
    auto a = simulate(spec, g, 0.25, 0.5, 40000, 1);
    auto b = simulate(spec, g, 0.0, 0.25, 40000, 2);
    for (std::size_t k : {4u, 16u, 30u, 48u}) {
        double ma = 0, mb = 0, va = 0, vb = 0;
        for (std::size_t p = 0; p < a.M; ++p) {
            ma += a.J(p, k);
            mb += b.J(p, k);
            va += a.J(p, k) * a.J(p, k);
            vb += b.J(p, k) * b.J(p, k);
        }
        const double n = a.M;
        ma /= n, mb /= n, va /= n, vb /= n;
        EXPECT_LT(std::abs(ma - mb), 3 * std::sqrt((va + vb) / n));
        EXPECT_LT(std::abs(va - vb), 3 * std::sqrt(2 * (va * va + vb * vb) / n));
    }
}

TEST(Simulate, ReproducibleAcrossWorkers) {
    auto g = make_grid(1.0, 100);
    auto spec = KernelSpec::gamma(1, 1, 0.2);
    auto a = simulate(spec, g, 0.1, 0.7, 3000, 77, 1);
    auto b = simulate(spec, g, 0.1, 0.7, 3000, 77, 4);
    auto c = simulate(spec, g, 0.1, 0.7, 3000, 78, 1);
    EXPECT_EQ(a.J_paths, b.J_paths);
    EXPECT_EQ(a.I_paths, b.I_paths);
    EXPECT_NE(a.J_paths, c.J_paths);
}

TEST(ThetaPath, TrivialCases) {
    auto g = make_grid(1.0, 100);
    PathSample gamma = PathSample::from_function(g, 1, [](double s, std::size_t) { return 0.1 * s; });
    auto spec = KernelSpec::exponential(1, 1);
    auto wt0 = build_weights(spec, g, 0.0, 0.0);
    Increments inc;
    inc.draw(wt0, 4, 0);
    EXPECT_EQ(theta_path(wt0, gamma, inc).values, gamma.values);

    auto wtz = build_weights(KernelSpec::zero(), g, 0.0, 0.4);
    Increments incz;
    incz.draw(wtz, 4, 0);
    EXPECT_EQ(theta_path(wtz, gamma, incz).values, gamma.values);
}

TEST(ThetaPath, ExponentialFactorisation) {
    auto g = make_grid(1.0, 2000);
    const double beta = 1.5, t = 0.4;
    auto wt = build_weights(KernelSpec::exponential(1, beta), g, 0.0, t);
    PathSample gamma(g, 1, 0.0);
    const std::size_t it = g->index_of(t);
    for (std::uint64_t path = 0; path < 20; ++path) {
        Increments inc;
        inc.draw(wt, 8, path);
        auto th = theta_path(wt, gamma, inc);
        for (std::size_t i = it; i < g->size(); i += 97) {
            const double s = (*g)[i];
            EXPECT_NEAR(th(i, 0), std::exp(-beta * (s - t)) * th(it, 0), 1e-3);
        }
    }
}

TEST(Simulate, OffGridTimesRejected) {
    auto g = make_grid(1.0, 10);
    EXPECT_THROW(simulate(KernelSpec::exponential(1, 1), g, 0.05, 0.5, 10, 1), Error);
}
