#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "volpath/error.hpp"
#include "volpath/kernels.hpp"

using namespace volpath;

namespace {

double tanh_sinh(const std::function<double(double)>& g, double a, double b) {
    boost::math::quadrature::tanh_sinh<double> q;
    return q.integrate(g, a, b, 1e-13);
}

double k00(const KernelSpec& k, double s, double t) { return eval(k, s, t)(0, 0); }

}  // namespace

TEST(Eval, Examples) {
    EXPECT_DOUBLE_EQ(k00(KernelSpec::power_law(1.0, 0.5), 1.0, 0.63), 1.0);
    // unit lag: the value is the scale itself, 1/Gamma(0.6) = 0.671505
    EXPECT_NEAR(k00(KernelSpec::power_law(1.0 / std::tgamma(0.6), 0.1), 1.5, 0.5), 1.0 / std::tgamma(0.6), 1e-15);
    EXPECT_NEAR(k00(KernelSpec::power_law(1.0 / std::tgamma(0.6), 0.1), 1.5, 0.5), 0.67147, 5e-5);
    EXPECT_NEAR(k00(KernelSpec::exponential(2.0, 1.0), 1.0, 0.0), 2.0 * std::exp(-1.0), 1e-15);
}

TEST(Eval, ZeroBeforeDiagonal) {
    for (auto k : {KernelSpec::power_law(1, 0.1), KernelSpec::exponential(1, 1), KernelSpec::gamma(1, 2, 0.3)})
        EXPECT_EQ(eval(k, 0.2, 0.3).norm(), 0.0);
}

TEST(Eval, SingularDiagonalSignals) {
    try {
        eval(KernelSpec::power_law(1, 0.1), 0.4, 0.4);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::undefined_at_diagonal);
    }
    EXPECT_DOUBLE_EQ(k00(KernelSpec::exponential(3, 1), 0.4, 0.4), 3.0);
}

TEST(Truncated, Examples) {
    auto pl = KernelSpec::power_law(1, 0.1);
    EXPECT_NEAR(eval_truncated(pl, 0.1, 0.3, 0.3)(0, 0), std::pow(0.1, -0.4), 1e-12);
    EXPECT_NEAR(eval_truncated(pl, 0.1, 0.3, 0.3)(0, 0), 2.51189, 5e-6);
    EXPECT_EQ(eval_truncated(pl, 0.1, 0.9, 0.3)(0, 0), k00(pl, 0.9, 0.3));
    auto ex = KernelSpec::exponential(1, 2);
    EXPECT_EQ(eval_truncated(ex, 0.05, 0.2, 0.2)(0, 0), k00(ex, 0.25, 0.2));
}

TEST(Truncated, ConvergesToKernel) {
    std::vector<KernelSpec> specs{KernelSpec::power_law(1, 0.1), KernelSpec::exponential(1, 1),
                                  KernelSpec::gamma(1, 1, 0.2), KernelSpec::log_fbm(1, 0.2, 1.0, 2.0)};
    for (const auto& k : specs)
        for (double lag : {0.001, 0.01, 0.05, 0.2, 0.7}) {
            const double exact = k00(k, 0.1 + lag, 0.1);
            double prev = 1e300;
            for (double delta : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
                const double gap = std::abs(eval_truncated(k, delta, 0.1 + lag, 0.1)(0, 0) - exact);
                EXPECT_LE(gap, prev);
                prev = gap;
            }
            EXPECT_EQ(prev, 0.0);
        }
}

TEST(CellIntegral, Examples) {
    EXPECT_NEAR(cell_integral(KernelSpec::power_law(1, 0.1), 1, 0, 1)(0, 0), 1.0 / 0.6, 1e-12);
    EXPECT_NEAR(cell_integral(KernelSpec::exponential(1, 1), 1, 0, 1)(0, 0), 1 - std::exp(-1.0), 1e-14);
    EXPECT_EQ(cell_integral(KernelSpec::gamma(1, 1, 0.1), 1, 0.3, 0.3).norm(), 0.0);
}

TEST(CellIntegral, QuadratureFamiliesAgainstTanhSinh) {
    std::vector<KernelSpec> specs{KernelSpec::gamma(1.3, 0.7, 0.1), KernelSpec::gamma(1, 2, 0.35),
                                  KernelSpec::log_fbm(1, 0.2, 1.0, 2.0), KernelSpec::log_fbm(0.5, 0.0, 2.0, 3.0)};
    for (const auto& k : specs) {
        const auto sk = *k.entry(0, 0);
        // the log kink sits at lag exp(-1/zeta); keep the oracle off it
        const double kink = sk.family == KernelFamily::log_fbm ? 1.0 - std::exp(-1.0 / sk.zeta_log) : -1.0;
        for (auto [a, b] : std::vector<std::pair<double, double>>{{0.0, 1.0}, {0.5, 0.998}, {0.99, 1.0}, {0.2, 0.4}}) {
            auto f = [&](double r) { return sk(1.0 - r); };
            const double want = kink > a && kink < b ? tanh_sinh(f, a, kink) + tanh_sinh(f, kink, b) : tanh_sinh(f, a, b);
            EXPECT_NEAR(cell_integral(k, 1.0, a, b)(0, 0), want, 1e-9 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST(CellIntegral, Additivity) {
    std::vector<KernelSpec> specs{KernelSpec::power_law(1, 0.1), KernelSpec::exponential(1, 1),
                                  KernelSpec::gamma(1, 1, 0.2), KernelSpec::log_fbm(1, 0.2, 1.0, 2.0)};
    for (const auto& k : specs) {
        const double s = 0.8, a = 0.1, b = 0.55, c = 0.8;
        const double whole = cell_integral(k, s, a, c)(0, 0);
        const double parts = cell_integral(k, s, a, b)(0, 0) + cell_integral(k, s, b, c)(0, 0);
        EXPECT_NEAR(whole, parts, 1e-10);
    }
}

TEST(Covariance, Examples) {
    EXPECT_NEAR(covariance_entry(KernelSpec::exponential(1, 1), 1, 1, 0, 1)(0, 0), (1 - std::exp(-2.0)) / 2, 1e-14);
    EXPECT_NEAR(covariance_entry(KernelSpec::power_law(1, 0.1), 1, 1, 0, 1)(0, 0), 5.0, 1e-10);
    EXPECT_EQ(covariance_entry(KernelSpec::power_law(1, 0.1), 1, 1, 0.4, 0.4).norm(), 0.0);
}

TEST(Covariance, DiagonalMatchesQuadratureOfSquare) {
    auto ex = KernelSpec::exponential(1.5, 0.8);
    const double want = tanh_sinh([&](double r) { return std::pow(k00(ex, 0.9, r), 2); }, 0.0, 0.9);
    EXPECT_NEAR(covariance_entry(ex, 0.9, 0.9, 0.0, 0.9)(0, 0), want, 1e-8 * want);

    for (const auto& k : {KernelSpec::gamma(1, 1, 0.2), KernelSpec::log_fbm(1, 0.3, 1.0, 2.0)}) {
        const auto sk = *k.entry(0, 0);
        for (double s : {1e-3, 0.01, 0.5}) {
            auto f = [&](double u) { return sk(u) * sk(u); };
            const double kink = sk.family == KernelFamily::log_fbm ? std::exp(-1.0 / sk.zeta_log) : 1e9;
            const double w = kink < s ? tanh_sinh(f, 0.0, kink) + tanh_sinh(f, kink, s) : tanh_sinh(f, 0.0, s);
            EXPECT_NEAR(covariance_entry(k, s, s, 0.0, s)(0, 0), w, 1e-6 * w);
        }
    }
}

TEST(Covariance, OffDiagonalSymmetryAndOracle) {
    auto k = KernelSpec::power_law(1, 0.1);
    const double c12 = covariance_entry(k, 0.7, 0.9, 0.0, 0.5)(0, 0);
    const double c21 = covariance_entry(k, 0.9, 0.7, 0.0, 0.5)(0, 0);
    EXPECT_NEAR(c12, c21, 1e-12);
    const double want = tanh_sinh([](double r) { return std::pow(0.7 - r, -0.4) * std::pow(0.9 - r, -0.4); }, 0.0, 0.5);
    EXPECT_NEAR(c12, want, 1e-9);
}

TEST(Composite, EntrywiseEvaluationAndCovariance) {
    ScalarKernel a{KernelFamily::exponential, 1.0, 1.0};
    ScalarKernel b{KernelFamily::power_law, 0.5, 0.0, 0.3};
    ScalarKernel z{KernelFamily::exponential, 0.0, 0.0};
    auto k = KernelSpec::composite(2, 2, {a, z, b, a});
    auto K = eval(k, 0.8, 0.3);
    EXPECT_DOUBLE_EQ(K(0, 0), std::exp(-0.5));
    EXPECT_EQ(K(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(K(1, 0), 0.5 * std::pow(0.5, -0.2));
    auto C = covariance_entry(k, 0.8, 0.8, 0.0, 0.8);
    EXPECT_NEAR(C(0, 1), C(1, 0), 1e-13);
    const double want = tanh_sinh([&](double r) { return a(0.8 - r) * b(0.8 - r); }, 0.0, 0.8);
    EXPECT_NEAR(C(0, 1), want, 1e-9);
}

TEST(Custom, FallsBackToQuadrature) {
    auto k = KernelSpec::from_function(1, 1, [](double s, double t) {
        Eigen::MatrixXd m(1, 1);
        m(0, 0) = s >= t ? 1.0 + s * t : 0.0;
        return m;
    });
    EXPECT_FALSE(k.is_convolution());
    // int_0^1 (1 + 0.5 r) dr
    EXPECT_NEAR(cell_integral(k, 0.5, 0.0, 0.5)(0, 0), 0.5 + 0.0625, 1e-10);
}

TEST(ColumnIntegrals, PowerLaw) {
    auto k = KernelSpec::power_law(1, 0.1);
    EXPECT_NEAR(column_integral(k, 0.2, 0.2, 0.3)(0, 0), std::pow(0.1, 0.6) / 0.6, 1e-12);
    EXPECT_NEAR(column_square_integral(k, 0.2, 0.2, 0.3, 0)(0, 0), std::pow(0.1, 0.2) / 0.2, 1e-10);
}

TEST(SingularityBound, EmpiricalSup) {
    auto s = singularity_sup(KernelSpec::power_law(2.0, 0.1), 1.0);
    ASSERT_TRUE(s);
    EXPECT_NEAR(*s, 2.0, 1e-12);
    auto g = singularity_sup(KernelSpec::gamma(1.0, 1.0, 0.1), 1.0);
    ASSERT_TRUE(g);
    EXPECT_LE(*g, 1.0);
    EXPECT_FALSE(singularity_sup(KernelSpec::log_fbm(1, 0.0, 1.0, 2.0), 1.0).has_value());
}

TEST(Validation, RejectsBadParameters) {
    EXPECT_THROW(KernelSpec::power_law(1, 1.2).validate(), Error);
    EXPECT_THROW(KernelSpec::log_fbm(1, 0.2, 1.0, 0.5).validate(), Error);
    EXPECT_NO_THROW(KernelSpec::log_fbm(1, 0.0, 1.0, 2.0).validate());
}
