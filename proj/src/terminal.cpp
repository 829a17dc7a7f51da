#include "volpath/terminal.hpp"

#include <cmath>

#include "volpath/error.hpp"
#include "volpath/rng.hpp"

namespace volpath {

Eigen::MatrixXd sigma_matrix(const KernelSpec& spec, double s, double T) {
    require(s >= T, "sigma_matrix requires s >= T");
    if (s == T) return Eigen::MatrixXd::Zero(spec.d, spec.d);
    return covariance_entry(spec, s, s, T, s);
}

namespace {

std::optional<std::vector<VolSlice::ExpTerm>> smoothed_terms(const VolSlice& slice, const GaussianRule& rule) {
    auto terms = slice.exp_affine();
    if (!terms) return std::nullopt;
    const long n = rule.nodes.cols();
    for (auto& term : *terms) {
        double mom = 0.0;
        for (long q = 0; q < n; ++q) {
            double e = 0.0;
            for (std::size_t i = 0; i < term.b.size(); ++i) e += term.b[i] * rule.nodes(static_cast<long>(i), q);
            mom += rule.weights[q] * std::exp(e);
        }
        term.a *= mom;
    }
    return terms;
}

double eval_terms(const std::vector<VolSlice::ExpTerm>& terms, std::size_t d, const double* x, double* grad,
                  double* hess, Diagnostics* diag) {
    if (grad) std::fill(grad, grad + d, 0.0);
    if (hess) std::fill(hess, hess + d * d, 0.0);
    double f = 0.0;
    for (const auto& term : terms) {
        double e = 0.0;
        for (std::size_t i = 0; i < d; ++i) e += term.b[i] * x[i];
        const double v = term.a * guarded_exp(e, diag);
        f += v;
        if (grad)
            for (std::size_t i = 0; i < d; ++i) grad[i] += v * term.b[i];
        if (hess)
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) hess[i * d + j] += v * term.b[i] * term.b[j];
    }
    return f;
}

}  // namespace

double frak_f(const VolModel& model, const KernelSpec& spec, double s, double T, const Eigen::VectorXd& theta,
              const SmoothedVolConfig& cfg) {
    const VolSlice slice = model.slice(s);
    const GaussianRule rule = gaussian_rule(sigma_matrix(spec, s, T), cfg.gh_order, cfg.inner_mc, cfg.inner_seed);
    const long d = theta.size();
    Eigen::VectorXd y(d);
    double acc = 0.0;
    for (long q = 0; q < rule.nodes.cols(); ++q) {
        y = theta + rule.nodes.col(q);
        acc += rule.weights[q] * slice.f(y.data());
    }
    return acc;
}

TerminalFunctional::TerminalFunctional(const VolModel& model, const KernelSpec& spec, GridPtr grid, double T,
                                       const SmoothedVolConfig& cfg)
    : d_(spec.d), grid_(std::move(grid)), T_(T) {
    require(model.support.has_value(), "terminal functional needs a resolved support window");
    const auto& g = *grid_;
    std::vector<bool> in(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) in[i] = model.in_support(g[i]);
    std::vector<double> weight(g.size(), 0.0);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        if (in[i] && in[i + 1]) {
            const double h = 0.5 * (g[i + 1] - g[i]);
            weight[i] += h;
            weight[i + 1] += h;
        }
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (weight[i] == 0.0) continue;
        Node node;
        node.grid_index = i;
        node.weight = weight[i];
        node.slice = model.slice(g[i]);
        node.smoothed = g[i] > T;
        const Eigen::MatrixXd sigma =
            node.smoothed ? sigma_matrix(spec, g[i], T) : Eigen::MatrixXd::Zero(d_, d_);
        node.rule = gaussian_rule(sigma, cfg.gh_order, cfg.inner_mc, derive_seed(cfg.inner_seed, i));
        node.terms = smoothed_terms(node.slice, node.rule);
        nodes_.push_back(std::move(node));
    }
}

double TerminalFunctional::node_raw(std::size_t n, const double* x, double* grad, double* hess,
                                    Diagnostics* diag) const {
    return nodes_[n].slice.eval(x, grad, hess, diag);
}

double TerminalFunctional::node_value(std::size_t n, const double* x, double* grad, double* hess,
                                      Diagnostics* diag) const {
    const Node& node = nodes_[n];
    if (node.terms) return eval_terms(*node.terms, d_, x, grad, hess, diag);
    const long nq = node.rule.nodes.cols();
    if (nq == 1 && node.rule.nodes.isZero(0.0)) return node.slice.eval(x, grad, hess, diag);
    std::vector<double> y(d_), g(grad ? d_ : 0), h(hess ? d_ * d_ : 0);
    if (grad) std::fill(grad, grad + d_, 0.0);
    if (hess) std::fill(hess, hess + d_ * d_, 0.0);
    double acc = 0.0;
    for (long q = 0; q < nq; ++q) {
        for (std::size_t i = 0; i < d_; ++i) y[i] = x[i] + node.rule.nodes(static_cast<long>(i), q);
        const double w = node.rule.weights[q];
        acc += w * node.slice.eval(y.data(), grad ? g.data() : nullptr, hess ? h.data() : nullptr, diag);
        if (grad)
            for (std::size_t i = 0; i < d_; ++i) grad[i] += w * g[i];
        if (hess)
            for (std::size_t i = 0; i < d_ * d_; ++i) hess[i] += w * h[i];
    }
    return acc;
}

double TerminalFunctional::value(const double* path, Diagnostics* diag) const {
    double acc = 0.0;
    for (std::size_t n = 0; n < nodes_.size(); ++n)
        acc += nodes_[n].weight * node_value(n, path + nodes_[n].grid_index * d_, nullptr, nullptr, diag);
    return acc;
}

double frak_F(const VolModel& model, const KernelSpec& spec, const PathSample& omega, double T,
              const SmoothedVolConfig& cfg) {
    const TerminalFunctional F(model, spec, omega.grid, T, cfg);
    return F.value(omega);
}

}  // namespace volpath
