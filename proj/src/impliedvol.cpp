#include "volpath/impliedvol.hpp"

#include <algorithm>
#include <cmath>

#include "volpath/error.hpp"

namespace volpath {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double bs_price(double S, double kappa, double sigma, double tau) {
    require(S > 0.0 && kappa > 0.0, "bs_price needs positive future and strike", ErrorCode::domain);
    require(sigma >= 0.0 && tau >= 0.0, "bs_price needs non-negative volatility and maturity", ErrorCode::domain);
    const double sd = sigma * std::sqrt(tau);
    if (sd == 0.0) return std::max(S - kappa, 0.0);
    const double d1 = std::log(S / kappa) / sd + 0.5 * sd;
    return S * norm_cdf(d1) - kappa * norm_cdf(d1 - sd);
}

double bs_price(const BSQuote& q) {
    require(q.T >= q.t, "bs_price needs t <= T", ErrorCode::domain);
    return bs_price(q.S, q.kappa, q.sigma, q.T - q.t);
}

ReducedV reduced_v(double tau, double x) {
    require(tau > 0.0, "reduced_v needs tau > 0", ErrorCode::domain);
    const double rt = std::sqrt(tau);
    const double d1 = x / rt + 0.5 * rt;
    const double d2 = d1 - rt;
    const double ex = std::exp(x);
    const double n2 = norm_pdf(d2);
    ReducedV r;
    r.v = ex * norm_cdf(d1) - norm_cdf(d2);
    r.v_tau = n2 / (2.0 * rt);
    r.v_x = ex * norm_cdf(d1);
    r.v_xx = r.v_x + ex * norm_pdf(d1) / rt;
    r.v_tau_x = -n2 * d2 / (2.0 * tau);
    const double dd2 = -x / (2.0 * tau * rt) - 1.0 / (4.0 * rt);
    r.v_tau_tau = n2 * (-d2 * dd2) / (2.0 * rt) - n2 / (4.0 * tau * rt);
    return r;
}

double implied_vol(double price, double S, double kappa, double tau) {
    require(S > 0.0 && kappa > 0.0 && tau > 0.0, "implied_vol needs positive inputs", ErrorCode::domain);
    const double intrinsic = std::max(S - kappa, 0.0);
    if (!(price >= intrinsic && price < S))
        fail(ErrorCode::out_of_band, "call price outside the no-arbitrage band (intrinsic, S)");
    if (price == intrinsic) return 0.0;
    const double tol = 1e-12 * S;
    const double rt = std::sqrt(tau);
    double lo = 0.0, hi = 5.0;
    if (bs_price(S, kappa, hi, tau) < price) fail(ErrorCode::out_of_band, "implied volatility above 5");
    // Start from the at-the-money approximation, clipped into the bracket.
    double sigma = std::clamp(std::sqrt(2.0 * std::abs(std::log(S / kappa)) / tau) + 0.2, 1e-6, hi);
    for (int it = 0; it < 200; ++it) {
        const double sd = sigma * rt;
        const double d1 = std::log(S / kappa) / sd + 0.5 * sd;
        const double f = S * norm_cdf(d1) - kappa * norm_cdf(d1 - sd) - price;
        if (f > 0.0)
            hi = sigma;
        else
            lo = sigma;
        const double vega = S * norm_pdf(d1) * rt;
        double next = vega > 0.0 ? sigma - f / vega : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - sigma);
        if (std::abs(f) <= tol && step <= 1e-15 * std::max(1.0, sigma)) return sigma;
        if (hi - lo <= 1e-16 * std::max(1.0, hi)) return sigma;
        if (std::abs(f) <= tol && step <= 1e-13 * sigma) return next;
        sigma = next;
    }
    return sigma;
}

IVState iv_state_from_derivatives(double kappa, double tau, double u, const std::vector<double>& du, double d2u,
                                  double dtu, double phi, const std::vector<double>& dphi, double d2phi,
                                  double dtphi) {
    require(du.size() == dphi.size(), "derivative vectors must have equal length");
    require(phi > 0.0 && kappa > 0.0 && tau > 0.0, "iv state needs positive future, strike and maturity",
            ErrorCode::domain);
    IVState s;
    s.tau = tau;
    s.kappa = kappa;
    s.future = phi;
    s.price = u;
    s.psi = std::log(phi / kappa);
    const double sig = implied_vol(u, phi, kappa, 1.0);
    s.sigma_hat = sig * sig;
    if (s.sigma_hat <= 0.0) {
        s.d_omega_psi.assign(du.size(), 0.0);
        s.d_omega_sigma_hat.assign(du.size(), 0.0);
        return s;
    }
    const ReducedV v = reduced_v(s.sigma_hat, s.psi);
    if (v.v_tau < 1e-14) fail(ErrorCode::degenerate_vega, "d_tau v below 1e-14; implied variance derivatives undefined");
    double dpsi2 = 0.0, cross = 0.0, dsh2 = 0.0;
    for (std::size_t j = 0; j < du.size(); ++j) {
        const double dpsi = dphi[j] / phi;
        const double dsh = (du[j] / kappa - v.v_x * dpsi) / v.v_tau;
        s.d_omega_psi.push_back(dpsi);
        s.d_omega_sigma_hat.push_back(dsh);
        dpsi2 += dpsi * dpsi;
        cross += dsh * dpsi;
        dsh2 += dsh * dsh;
    }
    const double d2psi = d2phi / phi - dpsi2;
    s.d2_omega_sigma_hat =
        (d2u / kappa - 2.0 * v.v_tau_x * cross - v.v_tau_tau * dsh2 - v.v_xx * dpsi2 - v.v_x * d2psi) / v.v_tau;
    s.dt_sigma_hat = (dtu / kappa - v.v_x * dtphi / phi) / v.v_tau;
    return s;
}

IVState iv_state(double t, const PathSample& omega, const Payoff& payoff, const VolModel& model,
                 const KernelSpec& spec, const PricingConfig& cfg, double eps_t, double delta,
                 int time_order) {
    Payoff future = payoff;
    future.strike = 0.0;
    future.smoothing = 0.0;
    if (payoff.is_vix())
        future.family = PayoffFamily::vix_future;
    else if (payoff.is_rv())
        future.family = PayoffFamily::rv_swap;
    else
        fail(ErrorCode::invalid_argument, "iv_state needs a VIX or realised-variance call");
    require(payoff.strike > 0.0, "iv_state needs a positive strike");
    const double tau = payoff.maturity - t;
    require(tau > 0.0, "iv_state needs t < T");
    if (spec.is_zero()) {
        const PricingProblem pu(t, omega.grid, payoff, model, spec, cfg);
        const PricingProblem pf(t, omega.grid, future, model, spec, cfg);
        const double u = terminal_value(pu, omega), phi = terminal_value(pf, omega);
        const std::vector<double> z(spec.m, 0.0);
        IVState s = iv_state_from_derivatives(payoff.strike, tau, u, z, 0.0, 0.0, phi, z, 0.0, 0.0);
        s.t = t;
        return s;
    }
    const PPDEPass pass = ppde_pass(t, omega, {payoff, future}, model, spec, eps_t, delta, cfg, time_order);
    const PPDEEstimates& eu = pass.payoffs[0];
    const PPDEEstimates& ef = pass.payoffs[1];
    std::vector<double> du, dphi;
    for (const auto& e : eu.first_singular) du.push_back(e.mean);
    for (const auto& e : ef.first_singular) dphi.push_back(e.mean);
    IVState s = iv_state_from_derivatives(payoff.strike, tau, eu.price.mean, du, eu.second_singular.mean,
                                          eu.time_derivative.mean, ef.price.mean, dphi, ef.second_singular.mean,
                                          ef.time_derivative.mean);
    s.t = t;
    if (s.sigma_hat > 0.0) {
        // The residual equals [res_u / kappa - v_x res_phi / phi] / v_tau; propagate
        // through that linear map with the covariance read off the pair sum.
        const ReducedV v = reduced_v(s.sigma_hat, s.psi);
        const double c1 = 1.0 / (s.kappa * v.v_tau);
        const double c2 = -v.v_x / (s.future * v.v_tau);
        const double su = eu.residual_singular.std_error, sf = ef.residual_singular.std_error;
        const double cov = 0.5 * (pass.pair_sum_se * pass.pair_sum_se - su * su - sf * sf);
        s.residual_se = std::sqrt(std::max(0.0, c1 * c1 * su * su + c2 * c2 * sf * sf + 2.0 * c1 * c2 * cov));
    }
    return s;
}

double iv_ppde_residual(const IVState& s) {
    if (!(s.sigma_hat > 1e-12)) fail(ErrorCode::sigma_hat_near_zero, "total implied variance is (near) zero");
    double cross = 0.0, dsh2 = 0.0, sq = 0.0;
    for (std::size_t j = 0; j < s.d_omega_psi.size(); ++j) {
        const double a = s.d_omega_sigma_hat[j], b = s.d_omega_psi[j];
        cross += a * b;
        dsh2 += a * a;
        const double e = b - s.psi / (2.0 * s.sigma_hat) * a;
        sq += e * e;
    }
    return s.dt_sigma_hat + 0.5 * (cross + s.d2_omega_sigma_hat) - (1.0 / 16.0 + 1.0 / (4.0 * s.sigma_hat)) * dsh2 + sq;
}

double iv_ppde_residual_tau(const IVState& s) {
    if (!(s.sigma_hat > 1e-12)) fail(ErrorCode::sigma_hat_near_zero, "total implied variance is (near) zero");
    const double tau = s.tau;
    const double Sig = std::sqrt(s.sigma_hat / tau);
    double cross = 0.0, dS2 = 0.0, sq = 0.0;
    std::vector<double> dS(s.d_omega_sigma_hat.size());
    for (std::size_t j = 0; j < dS.size(); ++j) {
        dS[j] = s.d_omega_sigma_hat[j] / (2.0 * tau * Sig);
        dS2 += dS[j] * dS[j];
    }
    const double d2S = (s.d2_omega_sigma_hat / (2.0 * tau) - dS2) / Sig;
    for (std::size_t j = 0; j < dS.size(); ++j) {
        cross += dS[j] * s.d_omega_psi[j];
        const double e = s.d_omega_psi[j] - s.psi / Sig * dS[j];
        sq += e * e;
    }
    const double d_tau_total = -s.dt_sigma_hat;
    const double rhs = tau * Sig * cross + tau * Sig * d2S - 0.25 * tau * tau * Sig * Sig * dS2 + sq;
    return rhs - d_tau_total;
}

}  // namespace volpath
