#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "volpath/gaussian_engine.hpp"
#include "volpath/payoff.hpp"
#include "volpath/terminal.hpp"
#include "volpath/volmodel.hpp"

namespace volpath {

struct PricingConfig {
    std::size_t M = 100000;
    std::uint64_t seed = 1;
    int steps_per_year = 500;
    SmoothedVolConfig quad;
    bool antithetic = false;
    int workers = 1;
    std::uint64_t batch_size = 1024;
    // Greeks: first derivative and Hessian term from grad f along the
    // simulated path instead of the conditioned grad frak_f.
    bool pathwise = false;
};

struct PriceEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t M = 0;
    std::uint64_t seed = 0;
    std::pair<double, double> ci95{0.0, 0.0};
    Diagnostics diag;
    double runtime_ms = 0.0;

    static PriceEstimate from_stats(double mean, double se, std::size_t M, std::uint64_t seed);
};

// Attaches the kernel and, when absent, the payoff's default support window.
VolModel resolve_model(const VolModel& model, const KernelSpec& spec, const Payoff& payoff);

// Uniform grid on [0, horizon] containing t, T, the support ends and `extra`.
GridPtr pricing_grid(double t, const Payoff& payoff, const VolModel& model, int steps_per_year,
                     const std::vector<double>& extra = {});

// Everything that depends on (t, grid) but not on omega or the path index.
class PricingProblem {
public:
    PricingProblem(double t, GridPtr grid, const Payoff& payoff, const VolModel& model, const KernelSpec& spec,
                   const PricingConfig& cfg);

    double t = 0.0;
    double T = 0.0;
    GridPtr grid;
    Payoff payoff;
    VolModel model;
    KernelSpec spec;
    PricingConfig cfg;
    WeightTensor wt;
    TerminalFunctional F;
    std::vector<long> node_local;  // per terminal node: local tensor index, -1 before t

    // J vanishes identically (K = 0 or t = T).
    bool deterministic() const;
    std::size_t n_samples() const;
    std::size_t reported_M() const;
};

// Per-thread scratch for path evaluations on one problem.
class PathWorker {
public:
    explicit PathWorker(const PricingProblem& pb);

    void draw(std::uint64_t path, std::size_t cell_begin = 0);
    // J at terminal nodes from local cells [c0, cells_T).
    void build_J(std::size_t c0 = 0);
    // x = omega + sign * J on terminal nodes (omega elsewhere).
    void set_x(const PathSample& omega, double sign);
    double V(Diagnostics& diag) const;
    // V with per-node conditioned gradients and optional Hessians.
    double V_derivs(Diagnostics& diag, bool hess);
    // Raw grad f (and Hessian) at omega + sign * I on terminal nodes.
    void pathwise_derivs(const PathSample& omega, double sign, bool hess, Diagnostics& diag);

    const PricingProblem& pb;
    Increments inc;
    std::vector<double> x;
    std::vector<double> J;      // terminal nodes x d
    std::vector<double> Iextra; // terminal nodes x d, I - J
    std::vector<double> grads;  // terminal nodes x d
    std::vector<double> hess;   // terminal nodes x d x d
    std::vector<double> pgrads, phess;
};

PriceEstimate price(const PricingProblem& pb, const PathSample& omega);
PriceEstimate price(double t, const PathSample& omega, const Payoff& payoff, const VolModel& model,
                    const KernelSpec& spec, const PricingConfig& cfg);
PriceEstimate price_at_state(double t, const PathSample& history, const PathSample& theta, const Payoff& payoff,
                             const VolModel& model, const KernelSpec& spec, const PricingConfig& cfg);

// phi(frak_F(omega)), the value at zero noise.
double terminal_value(const PricingProblem& pb, const PathSample& omega);

}  // namespace volpath
