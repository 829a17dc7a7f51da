#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace volpath {

// Nodes and weights for E[g(Z)], Z ~ N(0,1) (probabilists' Hermite),
// weights summing to one. Computed by Golub-Welsch.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussHermite gauss_hermite(int order);

// A rule for E[g(X)], X ~ N(0, Sigma) in R^d: nodes are columns of a d x n matrix.
struct GaussianRule {
    Eigen::MatrixXd nodes;
    std::vector<double> weights;
};

// Symmetric PSD square root factor L with L L^T = Sigma (eigen-decomposition,
// negative round-off eigenvalues clipped to zero).
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& sigma);

// Tensor Gauss-Hermite for d <= 3, antithetic Monte Carlo with a fixed
// sub-seed otherwise. Collapses to the single origin node when Sigma = 0.
GaussianRule gaussian_rule(const Eigen::MatrixXd& sigma, int gh_order, int inner_mc,
                           std::uint64_t seed);

}  // namespace volpath
