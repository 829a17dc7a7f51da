#include "volpath/verifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>

#include "volpath/error.hpp"
#include "volpath/parallel.hpp"
#include "volpath/quadrature.hpp"
#include "volpath/rng.hpp"

namespace volpath {

GridPtr verification_grid(double t, double eps_t, const Payoff& payoff, const VolModel& model, int steps_per_year,
                          const std::vector<double>& extra, int time_order) {
    std::vector<double> req = extra;
    for (int l = 1; l <= time_order; ++l) req.push_back(t + l * eps_t);
    return pricing_grid(t, payoff, model, steps_per_year, req);
}

namespace {

PriceEstimate estimate(const RunningStats& s, std::size_t M, std::uint64_t seed, const Diagnostics& diag) {
    PriceEstimate e = PriceEstimate::from_stats(s.mean, s.std_error(), M, seed);
    e.diag = diag;
    return e;
}

}  // namespace

PPDEPass ppde_pass(double t, const PathSample& omega, const std::vector<Payoff>& payoffs, const VolModel& model,
                   const KernelSpec& spec, double eps_t, double delta, const PricingConfig& cfg, int time_order) {
    require(!payoffs.empty(), "ppde_pass needs at least one payoff");
    require(eps_t > 0.0 && delta > 0.0, "eps_t and delta must be positive");
    require(time_order == 1 || time_order == 2, "time_order must be 1 or 2");
    for (const auto& p : payoffs)
        require(p.maturity == payoffs[0].maturity && p.default_support() == payoffs[0].default_support(),
                "payoffs must share maturity and support");
    const PricingProblem pb(t, omega.grid, payoffs[0], model, spec, cfg);
    const std::size_t L = static_cast<std::size_t>(time_order);
    require(t + L * eps_t <= pb.T + 1e-12, "t + eps_t steps must not exceed the maturity");
    for (std::size_t l = 1; l <= L; ++l) {
        const auto idx = omega.grid->find(t + static_cast<double>(l) * eps_t);
        if (!idx || *idx != pb.wt.first + l)
            fail(ErrorCode::grid_mismatch, "grid needs consecutive nodes at t + eps_t steps");
    }

    const std::size_t d = pb.wt.d, m = spec.m, nn = pb.F.nodes().size();
    std::vector<std::vector<double>> c_tr, c_sg, C_tr, C_sg;
    for (std::size_t j = 0; j < m; ++j) {
        const Direction tr = Direction::truncated(delta, j), sg = Direction::singular(j);
        c_tr.push_back(first_coefficients(pb, tr));
        c_sg.push_back(first_coefficients(pb, sg));
        C_tr.push_back(second_coefficients(pb, tr, tr));
        C_sg.push_back(second_coefficients(pb, sg, sg));
    }
    const std::size_t P = payoffs.size();
    const std::size_t per = 6 + m;
    const std::size_t k = P * per + (P == 2 ? 1 : 0);
    auto dot = [](const double* a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t q = 0; q < b.size(); ++q) s += a[q] * b[q];
        return s;
    };

    // The first L cells after t are integrated by a Gaussian rule instead of
    // sampled: prices and greeks at t (and the intermediate level) become
    // conditional expectations given the later increments, which removes the
    // chi-square noise of the time difference.
    std::vector<bool> resid_live(L, false);  // node c + 1 closes cell c with a residual normal
    for (std::size_t c = 0; c < L; ++c)
        for (long kk : pb.node_local) resid_live[c] = resid_live[c] || kk == static_cast<long>(c + 1);
    std::vector<GaussianRule> rules;
    for (std::size_t c = 0; c < L; ++c) {
        const std::size_t dim = m + (resid_live[c] ? d : 0);
        const int order = dim == 1 ? 8 : (dim == 2 ? 6 : 4);
        if (pb.deterministic()) {
            // nothing to integrate; one node keeps the time difference exactly zero
            rules.push_back({Eigen::MatrixXd::Zero(static_cast<long>(dim), 1), {1.0}});
            continue;
        }
        rules.push_back(gaussian_rule(Eigen::MatrixXd::Identity(static_cast<long>(dim), static_cast<long>(dim)), order,
                                      64, derive_seed(cfg.seed, 0x63656c6c + c)));
    }

    const SampleFnFactory factory = [&]() -> SampleFn {
        auto w = std::make_shared<PathWorker>(pb);
        w->x = omega.values;
        struct Scratch {
            std::vector<double> Jbase;               // sampled cells only
            std::vector<std::vector<double>> cell;   // per integrated cell and rule node: node contributions
            std::vector<double> level;               // per payoff and level: conditional price
        };
        auto sc = std::make_shared<Scratch>();
        return [&, w, sc](std::uint64_t q, double* out, Diagnostics& diag) {
            std::fill(out, out + k, 0.0);
            w->draw(q, L);
            w->build_J(L);
            sc->Jbase = w->J;
            // Contribution of integrated cell c at rule node r to every terminal node.
            sc->cell.assign(L, {});
            for (std::size_t c = 0; c < L; ++c) {
                const GaussianRule& rule = rules[c];
                const std::size_t nq = rule.weights.size();
                sc->cell[c].assign(nq * nn * d, 0.0);
                for (std::size_t r = 0; r < nq; ++r) {
                    for (std::size_t j = 0; j < m; ++j)
                        w->inc.dW[c * m + j] = pb.wt.sqrt_h[c] * rule.nodes(static_cast<long>(j), static_cast<long>(r));
                    for (std::size_t i = 0; i < d; ++i)
                        w->inc.Z[c * d + i] = resid_live[c] ? rule.nodes(static_cast<long>(m + i), static_cast<long>(r)) : 0.0;
                    double* dst = sc->cell[c].data() + r * nn * d;
                    for (std::size_t n = 0; n < nn; ++n) {
                        const long kk = pb.node_local[n];
                        if (kk > static_cast<long>(c))
                            accumulate_node(pb.wt, w->inc, static_cast<std::size_t>(kk), c, c + 1, dst + n * d);
                    }
                }
            }
            sc->level.assign(P * (L + 1), 0.0);
            auto level = [&](std::size_t p, std::size_t l) -> double& { return sc->level[p * (L + 1) + l]; };
            // Level L: fully sampled.
            w->set_x(omega, 1.0);
            {
                const double V = w->V(diag);
                for (std::size_t p = 0; p < P; ++p) level(p, L) = payoffs[p].eval(V, nullptr, nullptr, &diag);
            }
            // Intermediate level 1 (only when L = 2): integrate cell 1.
            if (L == 2) {
                const std::size_t nq = rules[1].weights.size();
                for (std::size_t r = 0; r < nq; ++r) {
                    const double* add = sc->cell[1].data() + r * nn * d;
                    for (std::size_t q2 = 0; q2 < nn * d; ++q2) w->J[q2] = sc->Jbase[q2] + add[q2];
                    w->set_x(omega, 1.0);
                    const double V = w->V(diag);
                    for (std::size_t p = 0; p < P; ++p)
                        level(p, 1) += rules[1].weights[r] * payoffs[p].eval(V, nullptr, nullptr, &diag);
                }
            }
            // Level 0 with greeks: integrate every cell in [0, L).
            std::vector<double> D1tr(m), D1sg(m), D2tr(m), D2sg(m);
            const std::size_t n0 = rules[0].weights.size();
            const std::size_t n1 = L == 2 ? rules[1].weights.size() : 1;
            for (std::size_t r0 = 0; r0 < n0; ++r0) {
                for (std::size_t r1 = 0; r1 < n1; ++r1) {
                    const double* add0 = sc->cell[0].data() + r0 * nn * d;
                    for (std::size_t q2 = 0; q2 < nn * d; ++q2) w->J[q2] = sc->Jbase[q2] + add0[q2];
                    double wr = rules[0].weights[r0];
                    if (L == 2) {
                        const double* add1 = sc->cell[1].data() + r1 * nn * d;
                        for (std::size_t q2 = 0; q2 < nn * d; ++q2) w->J[q2] += add1[q2];
                        wr *= rules[1].weights[r1];
                    }
                    w->set_x(omega, 1.0);
                    const double V = w->V_derivs(diag, true);
                    for (std::size_t j = 0; j < m; ++j) {
                        D1tr[j] = dot(w->grads.data(), c_tr[j]);
                        D1sg[j] = dot(w->grads.data(), c_sg[j]);
                        D2tr[j] = dot(w->hess.data(), C_tr[j]);
                        D2sg[j] = dot(w->hess.data(), C_sg[j]);
                    }
                    for (std::size_t p = 0; p < P; ++p) {
                        double p1 = 0.0, p2 = 0.0;
                        const double v = payoffs[p].eval(V, &p1, &p2, &diag);
                        double Gtr = 0.0, Gsg = 0.0;
                        for (std::size_t j = 0; j < m; ++j) {
                            Gtr += p2 * D1tr[j] * D1tr[j] + p1 * D2tr[j];
                            Gsg += p2 * D1sg[j] * D1sg[j] + p1 * D2sg[j];
                        }
                        double* o = out + p * per;
                        o[0] += wr * v;
                        for (std::size_t j = 0; j < m; ++j) o[1 + j] += wr * p1 * D1sg[j];
                        o[2 + m] += wr * Gtr;
                        o[3 + m] += wr * Gsg;
                    }
                }
            }
            for (std::size_t p = 0; p < P; ++p) {
                double* o = out + p * per;
                level(p, 0) = o[0];
                o[1 + m] = L == 1 ? (level(p, 1) - level(p, 0)) / eps_t
                                  : (-3.0 * level(p, 0) + 4.0 * level(p, 1) - level(p, 2)) / (2.0 * eps_t);
                o[4 + m] = o[1 + m] + 0.5 * o[2 + m];
                o[5 + m] = o[1 + m] + 0.5 * o[3 + m];
            }
            if (P == 2) out[2 * per] = out[per - 1] + out[2 * per - 1];
        };
    };
    const std::uint64_t n = pb.deterministic() ? 1 : cfg.M;
    const SampleSummary s = run_samples(n, k, cfg.workers, factory, cfg.batch_size);
    PPDEPass res;
    for (std::size_t p = 0; p < P; ++p) {
        const auto* st = s.stats.data() + p * per;
        PPDEEstimates e;
        e.price = estimate(st[0], cfg.M, cfg.seed, s.diag);
        for (std::size_t j = 0; j < m; ++j) e.first_singular.push_back(estimate(st[1 + j], cfg.M, cfg.seed, s.diag));
        e.time_derivative = estimate(st[1 + m], cfg.M, cfg.seed, s.diag);
        e.second_truncated = estimate(st[2 + m], cfg.M, cfg.seed, s.diag);
        e.second_singular = estimate(st[3 + m], cfg.M, cfg.seed, s.diag);
        e.residual = estimate(st[4 + m], cfg.M, cfg.seed, s.diag);
        e.residual_singular = estimate(st[5 + m], cfg.M, cfg.seed, s.diag);
        res.payoffs.push_back(e);
    }
    if (P == 2) res.pair_sum_se = s.stats[2 * per].std_error();
    return res;
}

PPDEReport ppde_residual(double t, const PathSample& omega, const Payoff& payoff, const VolModel& model,
                         const KernelSpec& spec, double eps_t, double delta, const PricingConfig& cfg,
                         int time_order) {
    require(payoff.family != PayoffFamily::vix_call && payoff.family != PayoffFamily::rv_call,
            "the PPDE residual needs a smooth payoff");
    PPDEReport r;
    r.est = ppde_pass(t, omega, {payoff}, model, spec, eps_t, delta, cfg, time_order).payoffs[0];
    const auto& e = r.est;
    r.relative = e.price.mean != 0.0 ? std::abs(e.residual.mean) / std::abs(e.price.mean) : std::abs(e.residual.mean);
    r.ci_contains_zero = e.residual.ci95.first <= 0.0 && 0.0 <= e.residual.ci95.second;
    r.singular_ci_contains_zero = e.residual_singular.ci95.first <= 0.0 && 0.0 <= e.residual_singular.ci95.second;
    return r;
}

MartingaleReport martingale_check(const std::vector<double>& times, const PathSample& gamma, const Payoff& payoff,
                                  const VolModel& model, const KernelSpec& spec, std::size_t M_outer,
                                  std::size_t M_inner, const PricingConfig& cfg) {
    require(M_outer >= 2 && M_inner >= 2, "martingale check needs at least two outer and inner samples");
    MartingaleReport rep;
    rep.M_outer = M_outer;
    rep.M_inner = M_inner;
    rep.pass = true;

    PricingConfig ref_cfg = cfg;
    ref_cfg.M = M_outer * M_inner;
    ref_cfg.seed = derive_seed(cfg.seed, 0x726566);
    const PriceEstimate ref = price(0.0, gamma, payoff, model, spec, ref_cfg);

    for (double s : times) {
        require(s > 0.0 && s < payoff.maturity, "martingale check times must lie in (0, T)");
        if (!gamma.grid->find(s)) fail(ErrorCode::grid_mismatch, "gamma grid has no node at a check time");
        const WeightTensor wt0s = build_weights(spec, gamma.grid, 0.0, s);
        PricingConfig inner = cfg;
        inner.M = M_inner;
        inner.workers = 1;
        const PricingProblem base(s, gamma.grid, payoff, model, spec, inner);
        const std::uint64_t outer_seed = derive_seed(cfg.seed, 0x6f75746572ull + static_cast<std::uint64_t>(s * 1e9));
        std::vector<double> vals(M_outer);
        parallel_for(M_outer, cfg.workers, [&](std::size_t i) {
            Increments inc;
            inc.draw(wt0s, outer_seed, i);
            const PathSample theta = theta_path(wt0s, gamma, inc);
            PricingProblem pb = base;
            pb.cfg.seed = derive_seed(cfg.seed, i);
            vals[i] = price(pb, theta).mean;
        });
        RunningStats st;
        for (double v : vals) st.add(v);
        MartingaleRow row;
        row.s = s;
        row.outer_mean = st.mean;
        row.outer_se = st.std_error();
        row.reference = ref.mean;
        row.reference_se = ref.std_error;
        row.difference = st.mean - ref.mean;
        row.combined_se = std::sqrt(row.outer_se * row.outer_se + ref.std_error * ref.std_error);
        row.pass = std::abs(row.difference) <= 3.0 * row.combined_se;
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

TimeInvarianceReport time_invariance_check(double t, const PathSample& omega, const Payoff& payoff,
                                           const VolModel& model, const KernelSpec& spec, const PricingConfig& cfg) {
    if (!spec.is_convolution())
        fail(ErrorCode::not_convolution, "time invariance needs a kernel of convolution type");
    require(t >= 0.0 && t <= payoff.maturity, "t must lie in [0, T]");
    const PricingProblem a(t, omega.grid, payoff, model, spec, cfg);

    const VolModel resolved = resolve_model(model, spec, payoff);
    Payoff shifted_payoff = payoff;
    shifted_payoff.maturity = payoff.maturity - t;
    auto grid = std::make_shared<const TimeGrid>(omega.grid->shifted(t));
    PathSample shifted_omega = omega;
    shifted_omega.grid = grid;
    const PricingProblem b(0.0, grid, shifted_payoff, resolved.shifted(t), spec, cfg);
    if (a.wt.first != b.wt.first || a.F.nodes().size() != b.F.nodes().size())
        fail(ErrorCode::grid_mismatch, "shifted grid does not align node for node");

    TimeInvarianceReport r;
    r.original = price(a, omega).mean;
    r.shifted = price(b, shifted_omega).mean;
    r.difference = r.original - r.shifted;
    r.bitwise = std::bit_cast<std::uint64_t>(r.original) == std::bit_cast<std::uint64_t>(r.shifted);
    return r;
}

FDReport fd_derivative_check(double t, const PathSample& omega, const Direction& eta, const Payoff& payoff,
                             const VolModel& model, const KernelSpec& spec, const PricingConfig& cfg,
                             const std::vector<double>& eps_ladder, double tol) {
    require(!eps_ladder.empty(), "empty eps ladder");
    const PricingProblem pb(t, omega.grid, payoff, model, spec, cfg);
    const PathSample path = direction_path(pb, eta);
    FDReport rep;
    rep.first = first_derivative(pb, omega, eta);
    rep.second = second_derivative(pb, omega, eta, eta);
    const double p0 = price(pb, omega).mean;
    rep.pass = true;
    std::vector<double> lx, ly;
    for (double eps : eps_ladder) {
        FDRow row;
        row.eps = eps;
        const double up = price(pb, axpy(omega, eps, path)).mean;
        const double dn = price(pb, axpy(omega, -eps, path)).mean;
        row.forward = (up - p0) / eps;
        row.central = (up - dn) / (2.0 * eps);
        row.second = (up - 2.0 * p0 + dn) / (eps * eps);
        row.rel_first = std::abs(row.central - rep.first.mean) / std::max(std::abs(rep.first.mean), 1e-300);
        row.rel_second = std::abs(row.second - rep.second.mean) / std::max(std::abs(rep.second.mean), 1e-300);
        if (eps <= 1e-2 + 1e-15) rep.pass = rep.pass && row.rel_first <= tol && row.rel_second <= tol;
        const double err = std::abs(row.forward - rep.first.mean);
        if (err > 0.0) {
            lx.push_back(std::log(eps));
            ly.push_back(std::log(err));
        }
        rep.rows.push_back(row);
    }
    if (lx.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i];
            my += ly[i];
        }
        mx /= static_cast<double>(lx.size());
        my /= static_cast<double>(ly.size());
        double num = 0, den = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            num += (lx[i] - mx) * (ly[i] - my);
            den += (lx[i] - mx) * (lx[i] - mx);
        }
        rep.forward_slope = num / den;
    }
    return rep;
}

}  // namespace volpath
