#pragma once

#include <vector>

#include "volpath/pricer.hpp"

namespace volpath {

struct Direction {
    enum class Kind { explicit_path, truncated_kernel, singular_kernel };
    Kind kind = Kind::explicit_path;
    PathSample path;       // explicit_path: values at grid nodes
    double delta = 0.0;    // truncated_kernel
    std::size_t column = 0;

    static Direction explicit_path(PathSample eta);
    static Direction truncated(double delta, std::size_t column = 0);
    static Direction singular(std::size_t column = 0);
};

// Grid values of a continuous direction; zero before t.
PathSample direction_path(const PricingProblem& pb, const Direction& eta);

// Per terminal node vectors c_n with <dV, eta> = sum_n grad F_n . c_n
// (trapezoid weights folded in; the cell next to a singular diagonal uses the
// exact kernel integral).
std::vector<double> first_coefficients(const PricingProblem& pb, const Direction& eta);

// Per terminal node symmetric matrices C_n with <d2V, (eta, eta2)> = sum_n <Hess F_n, C_n>.
std::vector<double> second_coefficients(const PricingProblem& pb, const Direction& eta, const Direction& eta2);

// Several first and second derivatives on one set of paths (common random numbers).
struct DerivativeRequest {
    std::vector<std::vector<double>> firsts;  // first coefficient sets
    struct Second {
        // Sum over pairs of phi'' D1(a) D1(b) + phi' <Hess, C>.
        std::vector<std::size_t> a, b;
        std::vector<std::vector<double>> hess_coefs;
    };
    std::vector<Second> seconds;
    // The first firsts_reported entries are returned as first derivatives.
    std::size_t firsts_reported = 0;
};

struct DerivativeResult {
    PriceEstimate price;
    std::vector<PriceEstimate> firsts;
    std::vector<PriceEstimate> seconds;
};

DerivativeResult derivatives(const PricingProblem& pb, const PathSample& omega, const DerivativeRequest& req);

PriceEstimate first_derivative(const PricingProblem& pb, const PathSample& omega, const Direction& eta);
PriceEstimate second_derivative(const PricingProblem& pb, const PathSample& omega, const Direction& eta,
                                const Direction& eta2);
std::vector<PriceEstimate> singular_first(const PricingProblem& pb, const PathSample& omega);
// sum_j <d2u, (K_j, K_j)> over Brownian columns j.
PriceEstimate singular_second(const PricingProblem& pb, const PathSample& omega);
// Same trace along the truncated columns K^{delta,t}_j.
PriceEstimate truncated_second(const PricingProblem& pb, const PathSample& omega, double delta);

PriceEstimate first_derivative(double t, const PathSample& omega, const Direction& eta, const Payoff& payoff,
                               const VolModel& model, const KernelSpec& spec, const PricingConfig& cfg);
PriceEstimate second_derivative(double t, const PathSample& omega, const Direction& eta, const Direction& eta2,
                                const Payoff& payoff, const VolModel& model, const KernelSpec& spec,
                                const PricingConfig& cfg);
std::vector<PriceEstimate> singular_first(double t, const PathSample& omega, const Payoff& payoff,
                                          const VolModel& model, const KernelSpec& spec, const PricingConfig& cfg);
PriceEstimate singular_second(double t, const PathSample& omega, const Payoff& payoff, const VolModel& model,
                              const KernelSpec& spec, const PricingConfig& cfg);

std::vector<double> hedge_ratio(double t, const PathSample& history, const PathSample& theta, const Payoff& payoff,
                                const VolModel& model, const KernelSpec& spec, const PricingConfig& cfg);

// Limit of g(delta) from three geometric deltas (delta, delta/2, delta/4):
// the log-linear fit of successive differences gives the rate.
struct DeltaExtrapolation {
    double limit = 0.0;
    double rate = 0.0;
};
DeltaExtrapolation delta_extrapolate(double g1, double g2, double g3);

// Fitted exponent alpha of |first_derivative| ~ delta^alpha for bump
// directions eta = max(0, 1 - (s-t)/delta) over the given deltas.
double delta_scaling_exponent(double t, const PathSample& omega, const std::vector<double>& deltas,
                              const Payoff& payoff, const VolModel& model, const KernelSpec& spec,
                              const PricingConfig& cfg);

}  // namespace volpath
