#include "volpath/pricer.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "volpath/error.hpp"
#include "volpath/parallel.hpp"
#include "volpath/rng.hpp"

namespace volpath {

PriceEstimate PriceEstimate::from_stats(double mean, double se, std::size_t M, std::uint64_t seed) {
    PriceEstimate e;
    e.mean = mean;
    e.std_error = se;
    e.M = M;
    e.seed = seed;
    e.ci95 = {mean - 1.96 * se, mean + 1.96 * se};
    return e;
}

VolModel resolve_model(const VolModel& model, const KernelSpec& spec, const Payoff& payoff) {
    VolModel m = model.with_kernel(spec);
    if (!m.support) {
        const auto s = payoff.default_support();
        m.support = std::make_pair(s.first - m.time_offset, s.second - m.time_offset);
    }
    m.validate();
    return m;
}

GridPtr pricing_grid(double t, const Payoff& payoff, const VolModel& model, int steps_per_year,
                     const std::vector<double>& extra) {
    const auto sup = model.support ? *model.support : payoff.default_support();
    const double horizon = std::max({payoff.maturity, sup.second, t});
    std::vector<double> req{t, payoff.maturity, sup.first, sup.second};
    req.insert(req.end(), extra.begin(), extra.end());
    return make_grid(horizon, steps_per_year, req);
}

PricingProblem::PricingProblem(double t_, GridPtr grid_, const Payoff& payoff_, const VolModel& model_,
                               const KernelSpec& spec_, const PricingConfig& cfg_)
    : t(t_),
      T(payoff_.maturity),
      grid(std::move(grid_)),
      payoff(payoff_),
      model(resolve_model(model_, spec_, payoff_)),
      spec(spec_),
      cfg(cfg_),
      wt(build_weights(spec_, grid, t_, payoff_.maturity)),
      F(model, spec_, grid, payoff_.maturity, [&] {
          SmoothedVolConfig q = cfg_.quad;
          q.inner_seed = derive_seed(cfg_.seed, 0x696e6e6572ull);
          return q;
      }()) {
    payoff.validate();
    require(t <= T, "pricing time must not exceed the maturity");
    require(cfg.M >= 2, "pricing needs M >= 2");
    require(model.d == spec.d, "model and kernel dimensions disagree", ErrorCode::config);
    node_local.resize(F.nodes().size());
    for (std::size_t n = 0; n < F.nodes().size(); ++n) {
        const std::size_t gi = F.nodes()[n].grid_index;
        node_local[n] = gi >= wt.first ? static_cast<long>(gi - wt.first) : -1;
    }
}

bool PricingProblem::deterministic() const { return spec.is_zero() || wt.cells_T == 0; }

std::size_t PricingProblem::n_samples() const { return cfg.antithetic ? std::max<std::size_t>(1, cfg.M / 2) : cfg.M; }

std::size_t PricingProblem::reported_M() const { return cfg.antithetic ? 2 * n_samples() : cfg.M; }

PathWorker::PathWorker(const PricingProblem& p) : pb(p) {
    const std::size_t n = pb.F.nodes().size(), d = pb.wt.d;
    x.assign(pb.grid->size() * d, 0.0);
    J.assign(n * d, 0.0);
    Iextra.assign(n * d, 0.0);
    grads.assign(n * d, 0.0);
    hess.assign(n * d * d, 0.0);
    pgrads.assign(n * d, 0.0);
    phess.assign(n * d * d, 0.0);
}

void PathWorker::draw(std::uint64_t path, std::size_t cell_begin) { inc.draw(pb.wt, pb.cfg.seed, path, 0, cell_begin); }

void PathWorker::build_J(std::size_t c0) {
    const std::size_t d = pb.wt.d;
    std::fill(J.begin(), J.end(), 0.0);
    for (std::size_t n = 0; n < pb.node_local.size(); ++n) {
        const long k = pb.node_local[n];
        if (k <= 0) continue;
        accumulate_node(pb.wt, inc, static_cast<std::size_t>(k), c0, pb.wt.cells_T, J.data() + n * d);
    }
}

void PathWorker::set_x(const PathSample& omega, double sign) {
    const std::size_t d = pb.wt.d;
    for (std::size_t n = 0; n < pb.node_local.size(); ++n) {
        const std::size_t gi = pb.F.nodes()[n].grid_index;
        for (std::size_t i = 0; i < d; ++i) x[gi * d + i] = omega.values[gi * d + i] + sign * J[n * d + i];
    }
}

double PathWorker::V(Diagnostics& diag) const { return pb.F.value(x.data(), &diag); }

double PathWorker::V_derivs(Diagnostics& diag, bool want_hess) {
    const std::size_t d = pb.wt.d;
    double acc = 0.0;
    const auto& nodes = pb.F.nodes();
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        acc += nodes[n].weight * pb.F.node_value(n, x.data() + nodes[n].grid_index * d, grads.data() + n * d,
                                                 want_hess ? hess.data() + n * d * d : nullptr, &diag);
    }
    return acc;
}

void PathWorker::pathwise_derivs(const PathSample& omega, double sign, bool want_hess, Diagnostics& diag) {
    const std::size_t d = pb.wt.d;
    const auto& nodes = pb.F.nodes();
    std::vector<double> y(d);
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        const std::size_t gi = nodes[n].grid_index;
        const long k = pb.node_local[n];
        for (std::size_t i = 0; i < d; ++i) y[i] = x[gi * d + i];
        if (nodes[n].smoothed && k > 0) {
            std::fill(Iextra.begin() + n * d, Iextra.begin() + (n + 1) * d, 0.0);
            accumulate_node(pb.wt, inc, static_cast<std::size_t>(k), pb.wt.cells_T, pb.wt.n_cells(),
                            Iextra.data() + n * d);
            for (std::size_t i = 0; i < d; ++i) y[i] = omega.values[gi * d + i] + sign * (J[n * d + i] + Iextra[n * d + i]);
        }
        pb.F.node_raw(n, y.data(), pgrads.data() + n * d, want_hess ? phess.data() + n * d * d : nullptr, &diag);
    }
}

double terminal_value(const PricingProblem& pb, const PathSample& omega) {
    Diagnostics diag;
    return pb.payoff.eval(pb.F.value(omega.values.data(), &diag), nullptr, nullptr, &diag);
}

namespace {

void check_omega(const PricingProblem& pb, const PathSample& omega) {
    if (!omega.grid || !(*omega.grid == *pb.grid)) fail(ErrorCode::grid_mismatch, "omega lives on a different grid");
    require(omega.d == pb.wt.d, "omega has the wrong dimension");
}

void warn_diagnostics(const Diagnostics& diag) {
    if (diag.floor_hits > 0)
        std::fprintf(stderr, "warning: variance floor 1e-12 activated %llu times inside the terminal functional\n",
                     static_cast<unsigned long long>(diag.floor_hits));
    if (diag.overflow_events > 0)
        std::fprintf(stderr, "warning: %llu exponential overflows saturated\n",
                     static_cast<unsigned long long>(diag.overflow_events));
}

}  // namespace

PriceEstimate price(const PricingProblem& pb, const PathSample& omega) {
    const auto start = std::chrono::steady_clock::now();
    check_omega(pb, omega);
    PriceEstimate est;
    if (pb.deterministic()) {
        Diagnostics diag;
        const double v = pb.payoff.eval(pb.F.value(omega.values.data(), &diag), nullptr, nullptr, &diag);
        est = PriceEstimate::from_stats(v, 0.0, pb.reported_M(), pb.cfg.seed);
        est.diag = diag;
    } else {
        const bool anti = pb.cfg.antithetic;
        const SampleFnFactory factory = [&]() -> SampleFn {
            auto worker = std::make_shared<PathWorker>(pb);
            for (std::size_t i = 0; i < worker->x.size(); ++i) worker->x[i] = omega.values[i];
            return [&pb, worker, anti, &omega](std::uint64_t q, double* out, Diagnostics& diag) {
                worker->draw(q);
                worker->build_J();
                worker->set_x(omega, 1.0);
                double v = pb.payoff.eval(worker->V(diag), nullptr, nullptr, &diag);
                if (anti) {
                    worker->set_x(omega, -1.0);
                    v = 0.5 * (v + pb.payoff.eval(worker->V(diag), nullptr, nullptr, &diag));
                }
                out[0] = v;
            };
        };
        const SampleSummary s = run_samples(pb.n_samples(), 1, pb.cfg.workers, factory, pb.cfg.batch_size);
        est = PriceEstimate::from_stats(s.stats[0].mean, s.stats[0].std_error(), pb.reported_M(), pb.cfg.seed);
        est.diag = s.diag;
    }
    warn_diagnostics(est.diag);
    est.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return est;
}

PriceEstimate price(double t, const PathSample& omega, const Payoff& payoff, const VolModel& model,
                    const KernelSpec& spec, const PricingConfig& cfg) {
    const PricingProblem pb(t, omega.grid, payoff, model, spec, cfg);
    return price(pb, omega);
}

PriceEstimate price_at_state(double t, const PathSample& history, const PathSample& theta, const Payoff& payoff,
                             const VolModel& model, const KernelSpec& spec, const PricingConfig& cfg) {
    return price(t, concatenate_segments(history, theta, t), payoff, model, spec, cfg);
}

}  // namespace volpath
