#include <gtest/gtest.h>

#include <cmath>

#include "volpath/error.hpp"
#include "volpath/payoff.hpp"

using namespace volpath;

namespace {

Payoff make(PayoffFamily fam, double strike = 0.2, double smoothing = 0.01) {
    Payoff p;
    p.family = fam;
    p.maturity = 0.5;
    p.strike = strike;
    p.smoothing = smoothing;
    return p;
}

}  // namespace

TEST(Payoff, DerivativesConsistentWithFiniteDifferences) {
    for (auto fam : {PayoffFamily::identity, PayoffFamily::vix_future, PayoffFamily::vix_call, PayoffFamily::rv_swap,
                     PayoffFamily::rv_call, PayoffFamily::smoothed_vix_call, PayoffFamily::smoothed_rv_call}) {
        const Payoff p = make(fam);
        for (int i = 0; i < 50; ++i) {
            const double x = 1e-3 * std::pow(1.13, i);  // spans 1e-3 .. 0.4
            double d1, d2;
            p.eval(x, &d1, &d2);
            const double h = 1e-6 * x;
            if (!p.is_smooth()) {
                // skip the kink
                const double y = p.is_vix() ? std::sqrt(x / p.delta_window) : x / p.maturity;
                const double yh = p.is_vix() ? std::sqrt((x + 2 * h) / p.delta_window) : (x + 2 * h) / p.maturity;
                const double yl = p.is_vix() ? std::sqrt((x - 2 * h) / p.delta_window) : (x - 2 * h) / p.maturity;
                if ((yl - p.strike) * (yh - p.strike) <= 0.0 || y == p.strike) continue;
            }
            const double fd1 = (p(x + h) - p(x - h)) / (2 * h);
            double a, b;
            p.eval(x + h, &a);
            p.eval(x - h, &b);
            const double fd2 = (a - b) / (2 * h);
            EXPECT_NEAR(fd1, d1, 1e-6 * (std::abs(d1) + 1e-6)) << to_string(fam) << " x=" << x;
            EXPECT_NEAR(fd2, d2, 1e-5 * (std::abs(d2) + 1e-3)) << to_string(fam) << " x=" << x;
        }
    }
}

TEST(Payoff, Values) {
    EXPECT_DOUBLE_EQ(make(PayoffFamily::identity)(0.3), 0.3);
    Payoff v = make(PayoffFamily::vix_future);
    EXPECT_DOUBLE_EQ(v(0.04 * v.delta_window), 0.2);
    EXPECT_DOUBLE_EQ(make(PayoffFamily::rv_swap, 0.01)(0.02), 0.02 / 0.5 - 0.01);
    EXPECT_DOUBLE_EQ(make(PayoffFamily::rv_call, 0.05)(0.02), 0.0);
    Payoff c = make(PayoffFamily::vix_call, 0.15);
    EXPECT_NEAR(c(0.04 * c.delta_window), 0.05, 1e-15);
}

TEST(Payoff, SoftplusConvergesUniformly) {
    Payoff c = make(PayoffFamily::vix_call, 0.2);
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        Payoff s = make(PayoffFamily::smoothed_vix_call, 0.2, eps);
        double worst = 0.0;
        for (int i = 1; i < 400; ++i) {
            const double x = i * 1e-4;
            worst = std::max(worst, std::abs(s(x) - c(x)));
        }
        EXPECT_LE(worst, eps * std::log(2.0) + 1e-15);
    }
    EXPECT_DOUBLE_EQ(softplus(800.0), 800.0);
    EXPECT_EQ(softplus(-800.0), 0.0);
    EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-16);
    EXPECT_DOUBLE_EQ(logistic(0.0), 0.5);
}

TEST(Payoff, FloorRaisesDiagnostic) {
    Payoff v = make(PayoffFamily::vix_future);
    Diagnostics d;
    const double y = v.eval(0.0, nullptr, nullptr, &d);
    EXPECT_EQ(d.floor_hits, 1u);
    EXPECT_TRUE(std::isfinite(y));
    v.eval(0.01, nullptr, nullptr, &d);
    EXPECT_EQ(d.floor_hits, 1u);
}

TEST(Payoff, DefaultSupport) {
    Payoff v = make(PayoffFamily::vix_call);
    EXPECT_EQ(v.default_support(), std::make_pair(0.5, 0.5 + 30.0 / 365.0));
    EXPECT_EQ(make(PayoffFamily::rv_swap).default_support(), std::make_pair(0.0, 0.5));
}

TEST(Payoff, Validation) {
    EXPECT_THROW(make(PayoffFamily::smoothed_vix_call, 0.2, 0.0).validate(), Error);
    EXPECT_THROW(make(PayoffFamily::vix_call, 0.0).validate(), Error);
    EXPECT_NO_THROW(make(PayoffFamily::vix_future).validate());
    EXPECT_THROW(payoff_family_from_string("digital"), Error);
    EXPECT_EQ(payoff_family_from_string("smoothed-rv-call"), PayoffFamily::smoothed_rv_call);
}
