#include "volpath/payoff.hpp"

#include <cmath>

#include "volpath/error.hpp"

namespace volpath {

std::string to_string(PayoffFamily family) {
    switch (family) {
        case PayoffFamily::identity: return "identity";
        case PayoffFamily::vix_future: return "vix-future";
        case PayoffFamily::vix_call: return "vix-call";
        case PayoffFamily::rv_swap: return "rv-swap";
        case PayoffFamily::rv_call: return "rv-call";
        case PayoffFamily::smoothed_vix_call: return "smoothed-vix-call";
        case PayoffFamily::smoothed_rv_call: return "smoothed-rv-call";
        case PayoffFamily::custom: return "custom";
    }
    return "unknown";
}

PayoffFamily payoff_family_from_string(const std::string& name) {
    for (auto f : {PayoffFamily::identity, PayoffFamily::vix_future, PayoffFamily::vix_call, PayoffFamily::rv_swap,
                   PayoffFamily::rv_call, PayoffFamily::smoothed_vix_call, PayoffFamily::smoothed_rv_call,
                   PayoffFamily::custom})
        if (to_string(f) == name) return f;
    fail(ErrorCode::config, "unknown payoff family '" + name + "'");
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

bool Payoff::is_vix() const {
    return family == PayoffFamily::vix_future || family == PayoffFamily::vix_call ||
           family == PayoffFamily::smoothed_vix_call;
}

bool Payoff::is_rv() const {
    return family == PayoffFamily::rv_swap || family == PayoffFamily::rv_call ||
           family == PayoffFamily::smoothed_rv_call;
}

bool Payoff::is_smooth() const { return family != PayoffFamily::vix_call && family != PayoffFamily::rv_call; }

std::pair<double, double> Payoff::default_support() const {
    if (is_vix()) return {maturity, maturity + delta_window};
    if (custom_support) return *custom_support;
    return {0.0, maturity};
}

Payoff Payoff::with_strike(double k) const {
    Payoff p = *this;
    p.strike = k;
    return p;
}

void Payoff::validate() const {
    require(maturity > 0.0, "payoff maturity must be positive", ErrorCode::config);
    require(delta_window > 0.0, "VIX window must be positive", ErrorCode::config);
    require(smoothing >= 0.0, "smoothing width must be non-negative", ErrorCode::config);
    if (family == PayoffFamily::smoothed_vix_call || family == PayoffFamily::smoothed_rv_call)
        require(smoothing > 0.0, "smoothed payoffs need a positive smoothing width", ErrorCode::config);
    if (family == PayoffFamily::vix_call || family == PayoffFamily::rv_call || family == PayoffFamily::smoothed_vix_call ||
        family == PayoffFamily::smoothed_rv_call)
        require(strike > 0.0, "call payoffs need a positive strike", ErrorCode::config);
    if (family == PayoffFamily::custom)
        require(custom && custom->phi && custom->d1 && custom->d2, "custom payoff needs phi, d1 and d2",
                ErrorCode::config);
}

double Payoff::eval(double x, double* d1, double* d2, Diagnostics* diag) const {
    // Inner transform y(x) with its derivatives.
    double y = x, y1 = 1.0, y2 = 0.0;
    if (is_vix()) {
        if (x < kFloor) {
            if (diag) ++diag->floor_hits;
            x = kFloor;
        }
        y = std::sqrt(x / delta_window);
        y1 = 0.5 / (delta_window * y);
        y2 = -0.25 / (delta_window * delta_window * y * y * y);
    } else if (is_rv()) {
        y = x / maturity;
        y1 = 1.0 / maturity;
        y2 = 0.0;
    }
    double g = y, g1 = 1.0, g2 = 0.0;
    switch (family) {
        case PayoffFamily::identity:
        case PayoffFamily::vix_future: break;
        case PayoffFamily::rv_swap: g = y - strike; break;
        case PayoffFamily::vix_call:
        case PayoffFamily::rv_call:
            g = y > strike ? y - strike : 0.0;
            g1 = y > strike ? 1.0 : 0.0;
            break;
        case PayoffFamily::smoothed_vix_call:
        case PayoffFamily::smoothed_rv_call: {
            const double z = (y - strike) / smoothing;
            g = smoothing * softplus(z);
            g1 = logistic(z);
            g2 = g1 * (1.0 - g1) / smoothing;
            break;
        }
        case PayoffFamily::custom: {
            if (d1) *d1 = custom->d1(x);
            if (d2) *d2 = custom->d2(x);
            return custom->phi(x);
        }
    }
    if (d1) *d1 = g1 * y1;
    if (d2) *d2 = g2 * y1 * y1 + g1 * y2;
    return g;
}

}  // namespace volpath
