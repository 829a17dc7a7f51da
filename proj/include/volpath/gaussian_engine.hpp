#pragma once

#include <cstdint>
#include <vector>

#include "volpath/grid.hpp"
#include "volpath/kernels.hpp"

namespace volpath {

// Discretisation of s -> int_t^s K(s,r) dW_r on the grid cells after t.
// Node k (local, grid index first + k) sees cells c < k with weight
// cell_integral / cell_length. The cell ending at node k additionally carries
// an independent residual with the exact conditional covariance
// int K K^T - h w w^T, which restores the variance lost near a singular diagonal.
struct WeightTensor {
    GridPtr grid;
    double t = 0.0;
    double T = 0.0;
    std::size_t d = 1;
    std::size_t m = 1;
    std::size_t first = 0;    // grid index of t
    std::size_t n_nodes = 0;  // nodes t .. back()
    std::size_t cells_T = 0;  // cells inside [t, T]
    std::vector<std::size_t> row_offset;
    std::vector<double> w;      // blocks d x m, row-major, node-major lower triangle
    std::vector<double> resid;  // per node, d x d factor of the near-diagonal residual
    std::vector<double> sqrt_h; // per local cell

    std::size_t n_cells() const { return n_nodes - 1; }
    const double* weight(std::size_t k, std::size_t c) const { return w.data() + (row_offset[k] + c) * d * m; }
    const double* residual(std::size_t k) const { return resid.data() + k * d * d; }
    // Local index of a grid time (throws grid_mismatch).
    std::size_t local(double s) const;
};

WeightTensor build_weights(const KernelSpec& spec, GridPtr grid, double t, double T);

// Normals of one path: per cell, m Brownian increments (already scaled by the
// square root of the cell length) and d residual normals for the node closing
// the cell. Keys are global grid cell indices shifted by key_offset.
struct Increments {
    std::size_t m = 1, d = 1;
    std::size_t first_cell = 0;  // global cell index of local cell 0
    std::vector<double> dW;      // n_cells x m
    std::vector<double> Z;       // n_cells x d

    void draw(const WeightTensor& wt, std::uint64_t seed, std::uint64_t path, std::int64_t key_offset = 0,
              std::size_t cell_begin = 0);
    void negate();
};

std::size_t pairs_per_cell(std::size_t m, std::size_t d);

// Adds sum over local cells c in [c0, min(k, c1)) of w[k][c] dW_c, plus the
// residual of node k when its closing cell lies in that range, into out (d).
void accumulate_node(const WeightTensor& wt, const Increments& inc, std::size_t k, std::size_t c0,
                     std::size_t c1, double* out);

struct GaussianBatch {
    std::size_t M = 0;
    std::uint64_t seed = 0;
    GridPtr grid;
    double t = 0.0, T = 0.0;
    std::size_t d = 1;
    std::size_t n_nodes = 0;  // nodes from t on
    std::vector<double> I_paths;  // M x n_nodes x d (empty for the exact sampler)
    std::vector<double> J_paths;  // M x n_nodes x d
    bool shared_increments = false;

    double J(std::size_t p, std::size_t k, std::size_t i = 0) const { return J_paths[(p * n_nodes + k) * d + i]; }
    double I(std::size_t p, std::size_t k, std::size_t i = 0) const { return I_paths[(p * n_nodes + k) * d + i]; }
};

GaussianBatch simulate(const KernelSpec& spec, GridPtr grid, double t, double T, std::size_t M, std::uint64_t seed,
                       int workers = 1);

GaussianBatch simulate_exact(const KernelSpec& spec, GridPtr grid, double t, double T, std::size_t M,
                             std::uint64_t seed);

// Theta^t_s = gamma_s + int_0^t K(s,r) dW_r on every node, from the increments
// of the cells in [0, t] (local cells of a tensor built with (0, t)).
PathSample theta_path(const WeightTensor& wt0t, const PathSample& gamma, const Increments& inc);

}  // namespace volpath
