#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "volpath/volmodel.hpp"

namespace volpath {

enum class PayoffFamily {
    identity,
    vix_future,
    vix_call,
    rv_swap,
    rv_call,
    smoothed_vix_call,
    smoothed_rv_call,
    custom
};

std::string to_string(PayoffFamily family);
PayoffFamily payoff_family_from_string(const std::string& name);

struct CustomPayoffFns {
    std::function<double(double)> phi, d1, d2;
};

// phi applied to V = frak_F. VIX families use sqrt(V / Delta); RV families use V / T.
struct Payoff {
    PayoffFamily family = PayoffFamily::identity;
    double maturity = 1.0;  // T
    double strike = 0.0;
    double delta_window = 30.0 / 365.0;
    double smoothing = 0.0;
    std::shared_ptr<const CustomPayoffFns> custom;
    std::optional<std::pair<double, double>> custom_support;

    static constexpr double kFloor = 1e-12;

    bool is_vix() const;
    bool is_rv() const;
    bool is_smooth() const;
    // Support window used when the model does not declare one.
    std::pair<double, double> default_support() const;
    double horizon() const { return default_support().second > maturity ? default_support().second : maturity; }

    // phi(x) and optionally phi'(x), phi''(x).
    double eval(double x, double* d1 = nullptr, double* d2 = nullptr, Diagnostics* diag = nullptr) const;
    double operator()(double x) const { return eval(x); }
    Payoff with_strike(double k) const;
    void validate() const;
};

double softplus(double z);
double logistic(double z);

}  // namespace volpath
