#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "volpath/grid.hpp"
#include "volpath/kernels.hpp"
#include "volpath/quadrature.hpp"
#include "volpath/volmodel.hpp"

namespace volpath {

struct SmoothedVolConfig {
    int gh_order = 32;
    int inner_mc = 4096;
    std::uint64_t inner_seed = 0;  // only used when d > 3
};

// Sigma_s = int_T^s K(s,r) K(s,r)^T dr.
Eigen::MatrixXd sigma_matrix(const KernelSpec& spec, double s, double T);

// frak_f_s(theta) = E f_s(theta + N(0, Sigma_s)).
double frak_f(const VolModel& model, const KernelSpec& spec, double s, double T, const Eigen::VectorXd& theta,
              const SmoothedVolConfig& cfg = {});

// The terminal functional frak_F on a fixed grid: trapezoid over the support
// nodes, raw f before T and Gaussian-smoothed f after T.
class TerminalFunctional {
public:
    struct Node {
        std::size_t grid_index = 0;
        double weight = 0.0;  // trapezoid weight
        bool smoothed = false;
        VolSlice slice;
        GaussianRule rule;
        // Bergomi families: frak_f(theta) = sum_k a_k M_k exp(b_k . theta) with M_k the rule applied to exp(b_k . X).
        std::optional<std::vector<VolSlice::ExpTerm>> terms;
    };

    TerminalFunctional(const VolModel& model, const KernelSpec& spec, GridPtr grid, double T,
                       const SmoothedVolConfig& cfg);

    const std::vector<Node>& nodes() const { return nodes_; }
    std::size_t d() const { return d_; }
    GridPtr grid() const { return grid_; }
    double T() const { return T_; }

    // F_s(x) for support node n, with optional gradient (d) and Hessian (d*d).
    double node_value(std::size_t n, const double* x, double* grad, double* hess, Diagnostics* diag) const;
    // Raw f_s(x) at node n regardless of smoothing (pathwise estimators).
    double node_raw(std::size_t n, const double* x, double* grad, double* hess, Diagnostics* diag) const;

    // frak_F of a full-grid path (row-major nodes x d).
    double value(const double* path, Diagnostics* diag = nullptr) const;
    double value(const PathSample& omega) const { return value(omega.values.data()); }

private:
    std::vector<Node> nodes_;
    std::size_t d_ = 1;
    GridPtr grid_;
    double T_ = 0.0;
};

double frak_F(const VolModel& model, const KernelSpec& spec, const PathSample& omega, double T,
              const SmoothedVolConfig& cfg = {});

}  // namespace volpath
