#pragma once

#include <vector>

#include "volpath/verifier.hpp"

namespace volpath {

double norm_cdf(double x);
double norm_pdf(double x);

struct BSQuote {
    double t = 0.0;
    double S = 1.0;  // future price
    double sigma = 0.2;
    double T = 1.0;
    double kappa = 1.0;
};

// Undiscounted call on a future. Zero total volatility gives the intrinsic value.
double bs_price(const BSQuote& q);
double bs_price(double S, double kappa, double sigma, double tau);

// Unit-volatility price v(tau, x) = e^x N(d1) - N(d2) and its partials.
struct ReducedV {
    double v = 0.0;
    double v_tau = 0.0;
    double v_x = 0.0;
    double v_tau_x = 0.0;
    double v_tau_tau = 0.0;
    double v_xx = 0.0;
};

ReducedV reduced_v(double tau, double x);

// Newton in sigma with a bisection bracket; intrinsic prices give 0.
double implied_vol(double price, double S, double kappa, double tau);

struct IVState {
    double t = 0.0;
    double tau = 0.0;
    double kappa = 0.0;
    double future = 0.0;  // phi(t, omega)
    double price = 0.0;   // u(t, omega)
    double psi = 0.0;
    double sigma_hat = 0.0;
    std::vector<double> d_omega_psi;
    std::vector<double> d_omega_sigma_hat;
    double d2_omega_sigma_hat = 0.0;
    double dt_sigma_hat = 0.0;
    // Standard error of the residual propagated from the Monte Carlo estimates.
    double residual_se = 0.0;
};

// Solves the chain-rule relations between u = kappa v(Sigma_hat, psi) and the
// future for the derivatives of Sigma_hat. Second derivatives are traces over
// the Brownian columns.
IVState iv_state_from_derivatives(double kappa, double tau, double u, const std::vector<double>& du, double d2u,
                                  double dtu, double phi, const std::vector<double>& dphi, double d2phi,
                                  double dtphi);

// payoff is the call (strike = kappa); the future is the matching identity
// payoff of the same family. Kernel-direction greeks use the singular columns;
// time derivatives use the one-sided difference of the given order, so omega's
// grid needs nodes at t + l eps_t (see verification_grid).
IVState iv_state(double t, const PathSample& omega, const Payoff& payoff, const VolModel& model,
                 const KernelSpec& spec, const PricingConfig& cfg, double eps_t = 1e-3, double delta = 0.02,
                 int time_order = 2);

// Left-hand side of the implied-variance PPDE in Sigma_hat form.
double iv_ppde_residual(const IVState& s);
// The same equation written in tau = T - t and Sigma, as RHS - d_tau(tau Sigma^2).
double iv_ppde_residual_tau(const IVState& s);

}  // namespace volpath
