#pragma once

#include <vector>

#include "volpath/greeks.hpp"

namespace volpath {

// Pricing grid with extra nodes at t + l eps_t, l = 1..time_order.
GridPtr verification_grid(double t, double eps_t, const Payoff& payoff, const VolModel& model, int steps_per_year,
                          const std::vector<double>& extra = {}, int time_order = 1);

// Time difference, kernel-direction greeks and PPDE residuals of several payoffs
// on one set of paths. All payoffs must share the maturity and support.
struct PPDEEstimates {
    PriceEstimate price;
    std::vector<PriceEstimate> first_singular;  // per Brownian column
    // [u(t+eps) - u(t)] / eps, or the one-sided second-order difference
    // [-3u(t) + 4u(t+eps) - u(t+2eps)] / (2 eps) when time_order = 2.
    PriceEstimate time_derivative;
    PriceEstimate second_truncated;             // trace along K^{delta,t}
    PriceEstimate second_singular;              // trace along K(., t)
    PriceEstimate residual;                     // time + half truncated trace
    PriceEstimate residual_singular;
};

struct PPDEPass {
    std::vector<PPDEEstimates> payoffs;
    // Standard error of residual_singular(0) + residual_singular(1), for covariances.
    double pair_sum_se = 0.0;
};

PPDEPass ppde_pass(double t, const PathSample& omega, const std::vector<Payoff>& payoffs, const VolModel& model,
                   const KernelSpec& spec, double eps_t, double delta, const PricingConfig& cfg,
                   int time_order = 1);

struct PPDEReport {
    PPDEEstimates est;
    double relative = 0.0;  // |residual| / price
    bool ci_contains_zero = false;
    bool singular_ci_contains_zero = false;
};

PPDEReport ppde_residual(double t, const PathSample& omega, const Payoff& payoff, const VolModel& model,
                         const KernelSpec& spec, double eps_t, double delta, const PricingConfig& cfg,
                         int time_order = 1);

struct MartingaleRow {
    double s = 0.0;
    double outer_mean = 0.0;
    double outer_se = 0.0;
    double reference = 0.0;
    double reference_se = 0.0;
    double difference = 0.0;
    double combined_se = 0.0;
    bool pass = false;
};

struct MartingaleReport {
    std::vector<MartingaleRow> rows;
    std::size_t M_outer = 0, M_inner = 0;
    bool pass = false;
};

// gamma must live on a grid that contains every check time.
MartingaleReport martingale_check(const std::vector<double>& times, const PathSample& gamma, const Payoff& payoff,
                                  const VolModel& model, const KernelSpec& spec, std::size_t M_outer,
                                  std::size_t M_inner, const PricingConfig& cfg);

struct TimeInvarianceReport {
    double original = 0.0;
    double shifted = 0.0;
    double difference = 0.0;
    bool bitwise = false;
};

// u(t, omega; T) against u(0, omega_{t+.}; T - t) on the grid shifted by t.
TimeInvarianceReport time_invariance_check(double t, const PathSample& omega, const Payoff& payoff,
                                           const VolModel& model, const KernelSpec& spec, const PricingConfig& cfg);

struct FDRow {
    double eps = 0.0;
    double forward = 0.0;  // [u(omega + eps eta) - u(omega)] / eps
    double central = 0.0;
    double second = 0.0;   // central second difference
    double rel_first = 0.0;
    double rel_second = 0.0;
};

struct FDReport {
    PriceEstimate first;
    PriceEstimate second;
    std::vector<FDRow> rows;
    double forward_slope = 0.0;  // log-log slope of the forward-difference error
    bool pass = false;
};

// Common-random-number differences along eta. pass requires both relative
// errors within tol at every eps <= 1e-2 of the ladder.
FDReport fd_derivative_check(double t, const PathSample& omega, const Direction& eta, const Payoff& payoff,
                             const VolModel& model, const KernelSpec& spec, const PricingConfig& cfg,
                             const std::vector<double>& eps_ladder = {1e-1, 1e-2, 1e-3, 1e-4}, double tol = 0.02);

}  // namespace volpath
