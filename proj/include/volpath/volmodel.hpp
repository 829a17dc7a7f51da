#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "volpath/kernels.hpp"

namespace volpath {

// Counters for numerical guards that fired during an evaluation.
struct Diagnostics {
    std::uint64_t overflow_events = 0;
    std::uint64_t floor_hits = 0;
    void merge(const Diagnostics& o) {
        overflow_events += o.overflow_events;
        floor_hits += o.floor_hits;
    }
};

// exp(x) saturating at exp(700), counting saturations.
double guarded_exp(double x, Diagnostics* diag);

enum class VolFamily {
    one_factor_bergomi,
    multi_factor_bergomi,
    hyperbolic,
    mixed_hyperbolic_quadratic,
    quintic_ou,
    custom
};

std::string to_string(VolFamily family);
VolFamily vol_family_from_string(const std::string& name);

// Piecewise-linear curve through (tenor, value) pairs, flat outside.
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;
    explicit PiecewiseLinear(std::vector<std::pair<double, double>> points);
    static PiecewiseLinear constant(double value) { return PiecewiseLinear({{0.0, value}}); }
    double operator()(double s) const;
    const std::vector<std::pair<double, double>>& points() const { return points_; }
    bool is_constant(double value) const;

private:
    std::vector<std::pair<double, double>> points_;
};

struct CustomVolFns {
    std::function<double(double s, const Eigen::VectorXd& x)> f;
    std::function<Eigen::VectorXd(double s, const Eigen::VectorXd& x)> grad;
    std::function<Eigen::MatrixXd(double s, const Eigen::VectorXd& x)> hess;
};

class VolSlice;

class VolModel {
public:
    VolFamily family = VolFamily::one_factor_bergomi;
    PiecewiseLinear zeta = PiecewiseLinear::constant(0.04);
    double nu = 1.0;
    std::vector<double> lambdas;
    std::array<double, 4> alphas{1.0, 0.0, 0.0, 0.0};  // alpha_0, alpha_1, alpha_3, alpha_5
    std::optional<std::pair<double, double>> support;  // derived from the payoff when absent
    double time_offset = 0.0;
    std::size_t d = 1;
    std::shared_ptr<const KernelSpec> kernel;  // variance-curve handle
    std::shared_ptr<const CustomVolFns> custom;

    static VolModel one_factor_bergomi(double zeta, double nu);
    // Callbacks are checked against central finite differences; throws config on mismatch.
    static VolModel from_functions(std::size_t d, CustomVolFns fns, std::pair<double, double> support);

    VolModel with_kernel(const KernelSpec& spec) const;
    VolModel with_support(double a, double b) const;
    // Same model seen from time t: s -> s + t in every absolute-time dependence.
    VolModel shifted(double t) const;

    bool in_support(double s) const;
    // int_0^{s + offset} K K^T dr.
    Eigen::MatrixXd variance(double s) const;
    VolSlice slice(double s) const;
    void validate() const;
};

// The variance map frozen at one time s; cheap to evaluate per path.
class VolSlice {
public:
    VolFamily family = VolFamily::one_factor_bergomi;
    bool active = false;
    double s = 0.0;
    double zeta = 0.0;
    std::size_t d = 1;
    double nu = 1.0;
    std::vector<double> lambdas;
    std::vector<double> var_diag;  // v_ii(s)
    std::array<double, 4> alphas{};
    double inv_norm = 1.0;  // quintic 1/E[p^2], mixed quadratic 1/(1+v_22)
    const CustomVolFns* custom = nullptr;

    // f, and when requested the gradient (d) and Hessian (d*d, row-major).
    double eval(const double* x, double* grad, double* hess, Diagnostics* diag = nullptr) const;
    double f(const double* x, Diagnostics* diag = nullptr) const { return eval(x, nullptr, nullptr, diag); }

    // Terms a_k exp(b_k . x) when f has that form (Bergomi families).
    struct ExpTerm {
        double a;
        std::vector<double> b;
    };
    std::optional<std::vector<ExpTerm>> exp_affine() const;
};

// Convenience wrappers on a full model.
double f(const VolModel& model, double s, const Eigen::VectorXd& x);
Eigen::VectorXd grad_f(const VolModel& model, double s, const Eigen::VectorXd& x);
Eigen::MatrixXd hess_f(const VolModel& model, double s, const Eigen::VectorXd& x);

// E[X^n] for X ~ N(0, v).
double gaussian_moment(int n, double v);

}  // namespace volpath
