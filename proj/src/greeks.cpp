#include "volpath/greeks.hpp"

#include <cmath>

#include "volpath/error.hpp"
#include "volpath/parallel.hpp"

namespace volpath {

Direction Direction::explicit_path(PathSample eta) {
    Direction d;
    d.kind = Kind::explicit_path;
    d.path = std::move(eta);
    return d;
}

Direction Direction::truncated(double delta, std::size_t column) {
    require(delta > 0.0, "truncation delta must be positive");
    Direction d;
    d.kind = Kind::truncated_kernel;
    d.delta = delta;
    d.column = column;
    return d;
}

Direction Direction::singular(std::size_t column) {
    Direction d;
    d.kind = Kind::singular_kernel;
    d.column = column;
    return d;
}

namespace {

struct CellLayout {
    std::vector<long> node_of;  // grid index -> terminal node
    std::vector<std::size_t> cells;  // left grid index of each supported cell
};

CellLayout layout(const PricingProblem& pb) {
    const auto& g = *pb.grid;
    CellLayout L;
    L.node_of.assign(g.size(), -1);
    for (std::size_t n = 0; n < pb.F.nodes().size(); ++n) L.node_of[pb.F.nodes()[n].grid_index] = static_cast<long>(n);
    for (std::size_t i = 0; i + 1 < g.size(); ++i)
        if (pb.model.in_support(g[i]) && pb.model.in_support(g[i + 1])) L.cells.push_back(i);
    return L;
}

// Regular direction value at grid index gi (d entries).
Eigen::VectorXd direction_value(const PricingProblem& pb, const Direction& eta, std::size_t gi) {
    const std::size_t d = pb.wt.d;
    const double s = (*pb.grid)[gi];
    switch (eta.kind) {
        case Direction::Kind::explicit_path: {
            if (!(*eta.path.grid == *pb.grid)) fail(ErrorCode::grid_mismatch, "direction lives on a different grid");
            require(eta.path.d == d, "direction has the wrong dimension");
            // only the part on [t, T] moves the state
            if (gi < pb.wt.first) return Eigen::VectorXd::Zero(static_cast<long>(d));
            return Eigen::Map<const Eigen::VectorXd>(eta.path.at(gi), static_cast<long>(d));
        }
        case Direction::Kind::truncated_kernel:
            require(eta.column < pb.spec.m, "direction column out of range");
            if (gi < pb.wt.first) return Eigen::VectorXd::Zero(static_cast<long>(d));
            return eval_truncated(pb.spec, eta.delta, s, pb.t).col(static_cast<long>(eta.column));
        case Direction::Kind::singular_kernel:
            require(eta.column < pb.spec.m, "direction column out of range");
            if (gi <= pb.wt.first) return Eigen::VectorXd::Zero(static_cast<long>(d));
            return eval(pb.spec, s, pb.t).col(static_cast<long>(eta.column));
    }
    return Eigen::VectorXd::Zero(static_cast<long>(d));
}

}  // namespace

PathSample direction_path(const PricingProblem& pb, const Direction& eta) {
    require(eta.kind != Direction::Kind::singular_kernel, "singular kernel columns have no grid values");
    PathSample out(pb.grid, pb.wt.d);
    for (std::size_t gi = 0; gi < pb.grid->size(); ++gi) {
        const Eigen::VectorXd v = direction_value(pb, eta, gi);
        for (std::size_t i = 0; i < pb.wt.d; ++i) out(gi, i) = v(static_cast<long>(i));
    }
    return out;
}

std::vector<double> first_coefficients(const PricingProblem& pb, const Direction& eta) {
    const std::size_t d = pb.wt.d;
    const auto& g = *pb.grid;
    const CellLayout L = layout(pb);
    std::vector<double> c(pb.F.nodes().size() * d, 0.0);
    auto add = [&](std::size_t gi, const Eigen::VectorXd& v, double scale) {
        const long n = L.node_of[gi];
        for (std::size_t i = 0; i < d; ++i) c[static_cast<std::size_t>(n) * d + i] += scale * v(static_cast<long>(i));
    };
    const bool singular = eta.kind == Direction::Kind::singular_kernel;
    for (std::size_t gi : L.cells) {
        const double h = g[gi + 1] - g[gi];
        if (singular && gi < pb.wt.first) continue;
        if (singular && gi == pb.wt.first) {
            const Eigen::VectorXd A =
                column_integral(pb.spec, pb.t, g[gi], g[gi + 1]).col(static_cast<long>(eta.column));
            add(gi, A, 0.5);
            add(gi + 1, A, 0.5);
            continue;
        }
        add(gi, direction_value(pb, eta, gi), 0.5 * h);
        add(gi + 1, direction_value(pb, eta, gi + 1), 0.5 * h);
    }
    return c;
}

std::vector<double> second_coefficients(const PricingProblem& pb, const Direction& e1, const Direction& e2) {
    const std::size_t d = pb.wt.d;
    const auto& g = *pb.grid;
    const CellLayout L = layout(pb);
    const bool s1 = e1.kind == Direction::Kind::singular_kernel;
    const bool s2 = e2.kind == Direction::Kind::singular_kernel;
    require(s1 == s2, "second derivatives mixing singular and regular directions are not supported");
    if (s1) require(e1.column == e2.column, "singular second derivatives need a common column");
    std::vector<double> C(pb.F.nodes().size() * d * d, 0.0);
    auto add = [&](std::size_t gi, const Eigen::MatrixXd& M, double scale) {
        double* dst = C.data() + static_cast<std::size_t>(L.node_of[gi]) * d * d;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) dst[i * d + j] += scale * M(static_cast<long>(i), static_cast<long>(j));
    };
    auto sym = [&](std::size_t gi) -> Eigen::MatrixXd {
        const Eigen::VectorXd a = direction_value(pb, e1, gi);
        const Eigen::VectorXd b = direction_value(pb, e2, gi);
        Eigen::MatrixXd M(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                M(static_cast<long>(i), static_cast<long>(j)) =
                    0.5 * (a(static_cast<long>(i)) * b(static_cast<long>(j)) + b(static_cast<long>(i)) * a(static_cast<long>(j)));
        return M;
    };
    for (std::size_t gi : L.cells) {
        const double h = g[gi + 1] - g[gi];
        if (s1 && gi < pb.wt.first) continue;
        if (s1 && gi == pb.wt.first) {
            const Eigen::MatrixXd Q = column_square_integral(pb.spec, pb.t, g[gi], g[gi + 1], e1.column);
            add(gi, Q, 0.5);
            add(gi + 1, Q, 0.5);
            continue;
        }
        add(gi, sym(gi), 0.5 * h);
        add(gi + 1, sym(gi + 1), 0.5 * h);
    }
    return C;
}

DerivativeResult derivatives(const PricingProblem& pb, const PathSample& omega, const DerivativeRequest& req) {
    if (!(*omega.grid == *pb.grid)) fail(ErrorCode::grid_mismatch, "omega lives on a different grid");
    const std::size_t d = pb.wt.d;
    const std::size_t nn = pb.F.nodes().size();
    const std::size_t nf = req.firsts.size();
    const std::size_t nr = req.firsts_reported;
    const std::size_t ns = req.seconds.size();
    const std::size_t k = 1 + nr + ns;
    bool need_hess = false;
    for (const auto& s : req.seconds) need_hess = need_hess || !s.hess_coefs.empty();
    const bool pathwise = pb.cfg.pathwise;

    auto evaluate = [&](PathWorker& w, const PathSample& om, double sign, double* out, Diagnostics& diag) {
        w.set_x(om, sign);
        const double V = w.V_derivs(diag, need_hess);
        double p1 = 0.0, p2 = 0.0;
        const double p0 = pb.payoff.eval(V, &p1, &p2, &diag);
        if (pathwise) w.pathwise_derivs(om, sign, need_hess, diag);
        std::vector<double> D1(nf, 0.0);
        for (std::size_t i = 0; i < nf; ++i) {
            double acc = 0.0;
            const auto& c = req.firsts[i];
            for (std::size_t q = 0; q < nn * d; ++q) acc += w.grads[q] * c[q];
            D1[i] = acc;
        }
        out[0] = p0;
        for (std::size_t i = 0; i < nr; ++i) {
            double D = D1[i];
            if (pathwise) {
                D = 0.0;
                for (std::size_t q = 0; q < nn * d; ++q) D += w.pgrads[q] * req.firsts[i][q];
            }
            out[1 + i] = p1 * D;
        }
        const std::vector<double>& H = pathwise ? w.phess : w.hess;
        for (std::size_t j = 0; j < ns; ++j) {
            const auto& s = req.seconds[j];
            double acc = 0.0;
            for (std::size_t p = 0; p < s.a.size(); ++p) {
                double h = 0.0;
                if (!s.hess_coefs.empty()) {
                    const auto& C = s.hess_coefs[p];
                    for (std::size_t q = 0; q < nn * d * d; ++q) h += H[q] * C[q];
                }
                acc += p2 * (D1[s.a[p]] * D1[s.b[p]]) + p1 * h;
            }
            out[1 + nr + j] = acc;
        }
    };

    DerivativeResult res;
    const std::uint64_t seed = pb.cfg.seed;
    if (pb.deterministic()) {
        PathWorker w(pb);
        w.x = omega.values;
        std::vector<double> out(k);
        Diagnostics diag;
        evaluate(w, omega, 0.0, out.data(), diag);
        res.price = PriceEstimate::from_stats(out[0], 0.0, pb.reported_M(), seed);
        for (std::size_t i = 0; i < nr; ++i) res.firsts.push_back(PriceEstimate::from_stats(out[1 + i], 0.0, pb.reported_M(), seed));
        for (std::size_t j = 0; j < ns; ++j)
            res.seconds.push_back(PriceEstimate::from_stats(out[1 + nr + j], 0.0, pb.reported_M(), seed));
        return res;
    }
    const bool anti = pb.cfg.antithetic;
    const SampleFnFactory factory = [&]() -> SampleFn {
        auto w = std::make_shared<PathWorker>(pb);
        w->x = omega.values;
        auto tmp = std::make_shared<std::vector<double>>(k);
        return [&, w, tmp](std::uint64_t q, double* out, Diagnostics& diag) {
            w->draw(q);
            w->build_J();
            evaluate(*w, omega, 1.0, out, diag);
            if (anti) {
                evaluate(*w, omega, -1.0, tmp->data(), diag);
                for (std::size_t i = 0; i < k; ++i) out[i] = 0.5 * (out[i] + (*tmp)[i]);
            }
        };
    };
    const SampleSummary s = run_samples(pb.n_samples(), k, pb.cfg.workers, factory, pb.cfg.batch_size);
    auto est = [&](std::size_t i) {
        PriceEstimate e = PriceEstimate::from_stats(s.stats[i].mean, s.stats[i].std_error(), pb.reported_M(), seed);
        e.diag = s.diag;
        return e;
    };
    res.price = est(0);
    for (std::size_t i = 0; i < nr; ++i) res.firsts.push_back(est(1 + i));
    for (std::size_t j = 0; j < ns; ++j) res.seconds.push_back(est(1 + nr + j));
    return res;
}

PriceEstimate first_derivative(const PricingProblem& pb, const PathSample& omega, const Direction& eta) {
    DerivativeRequest req;
    req.firsts = {first_coefficients(pb, eta)};
    req.firsts_reported = 1;
    return derivatives(pb, omega, req).firsts[0];
}

PriceEstimate second_derivative(const PricingProblem& pb, const PathSample& omega, const Direction& eta,
                                const Direction& eta2) {
    DerivativeRequest req;
    req.firsts = {first_coefficients(pb, eta), first_coefficients(pb, eta2)};
    DerivativeRequest::Second s;
    s.a = {0};
    s.b = {1};
    s.hess_coefs = {second_coefficients(pb, eta, eta2)};
    req.seconds = {s};
    return derivatives(pb, omega, req).seconds[0];
}

namespace {

DerivativeRequest column_request(const PricingProblem& pb, const std::function<Direction(std::size_t)>& make) {
    DerivativeRequest req;
    DerivativeRequest::Second s;
    for (std::size_t j = 0; j < pb.spec.m; ++j) {
        const Direction dir = make(j);
        req.firsts.push_back(first_coefficients(pb, dir));
        s.a.push_back(j);
        s.b.push_back(j);
        s.hess_coefs.push_back(second_coefficients(pb, dir, dir));
    }
    req.firsts_reported = pb.spec.m;
    req.seconds = {s};
    return req;
}

}  // namespace

std::vector<PriceEstimate> singular_first(const PricingProblem& pb, const PathSample& omega) {
    DerivativeRequest req;
    for (std::size_t j = 0; j < pb.spec.m; ++j) req.firsts.push_back(first_coefficients(pb, Direction::singular(j)));
    req.firsts_reported = pb.spec.m;
    return derivatives(pb, omega, req).firsts;
}

PriceEstimate singular_second(const PricingProblem& pb, const PathSample& omega) {
    return derivatives(pb, omega, column_request(pb, [](std::size_t j) { return Direction::singular(j); })).seconds[0];
}

PriceEstimate truncated_second(const PricingProblem& pb, const PathSample& omega, double delta) {
    return derivatives(pb, omega, column_request(pb, [&](std::size_t j) { return Direction::truncated(delta, j); }))
        .seconds[0];
}

PriceEstimate first_derivative(double t, const PathSample& omega, const Direction& eta, const Payoff& payoff,
                               const VolModel& model, const KernelSpec& spec, const PricingConfig& cfg) {
    const PricingProblem pb(t, omega.grid, payoff, model, spec, cfg);
    return first_derivative(pb, omega, eta);
}

PriceEstimate second_derivative(double t, const PathSample& omega, const Direction& eta, const Direction& eta2,
                                const Payoff& payoff, const VolModel& model, const KernelSpec& spec,
                                const PricingConfig& cfg) {
    const PricingProblem pb(t, omega.grid, payoff, model, spec, cfg);
    return second_derivative(pb, omega, eta, eta2);
}

std::vector<PriceEstimate> singular_first(double t, const PathSample& omega, const Payoff& payoff,
                                          const VolModel& model, const KernelSpec& spec, const PricingConfig& cfg) {
    const PricingProblem pb(t, omega.grid, payoff, model, spec, cfg);
    return singular_first(pb, omega);
}

PriceEstimate singular_second(double t, const PathSample& omega, const Payoff& payoff, const VolModel& model,
                              const KernelSpec& spec, const PricingConfig& cfg) {
    const PricingProblem pb(t, omega.grid, payoff, model, spec, cfg);
    return singular_second(pb, omega);
}

std::vector<double> hedge_ratio(double t, const PathSample& history, const PathSample& theta, const Payoff& payoff,
                                const VolModel& model, const KernelSpec& spec, const PricingConfig& cfg) {
    const PathSample omega = concatenate_segments(history, theta, t);
    std::vector<double> out;
    for (const auto& e : singular_first(t, omega, payoff, model, spec, cfg)) out.push_back(e.mean);
    return out;
}

DeltaExtrapolation delta_extrapolate(double g1, double g2, double g3) {
    DeltaExtrapolation r;
    const double d1 = g1 - g2, d2 = g2 - g3;
    if (d1 == 0.0 || d2 == 0.0 || (d1 > 0) != (d2 > 0)) {
        r.limit = g3;
        return r;
    }
    const double ratio = d2 / d1;
    r.rate = -std::log2(ratio);
    r.limit = ratio < 1.0 ? g3 - d2 * ratio / (1.0 - ratio) : g3;
    return r;
}

double delta_scaling_exponent(double t, const PathSample& omega, const std::vector<double>& deltas,
                              const Payoff& payoff, const VolModel& model, const KernelSpec& spec,
                              const PricingConfig& cfg) {
    require(deltas.size() >= 2, "delta scaling needs at least two deltas");
    const PricingProblem pb(t, omega.grid, payoff, model, spec, cfg);
    std::vector<double> lx, ly;
    for (double delta : deltas) {
        PathSample eta = PathSample::from_function(omega.grid, omega.d, [&](double s, std::size_t i) {
            return i == 0 && s >= t ? std::max(0.0, 1.0 - (s - t) / delta) : 0.0;
        });
        const double v = std::abs(first_derivative(pb, omega, Direction::explicit_path(eta)).mean);
        lx.push_back(std::log(delta));
        ly.push_back(std::log(v));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    return num / den;
}

}  // namespace volpath
