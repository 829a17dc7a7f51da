#include "volpath/gaussian_engine.hpp"

#include <cmath>

#include "volpath/error.hpp"
#include "volpath/parallel.hpp"
#include "volpath/quadrature.hpp"
#include "volpath/rng.hpp"

namespace volpath {

std::size_t WeightTensor::local(double s) const {
    const std::size_t g = grid->index_of(s);
    if (g < first) fail(ErrorCode::grid_mismatch, "time lies before the tensor start");
    return g - first;
}

WeightTensor build_weights(const KernelSpec& spec, GridPtr grid, double t, double T) {
    require(T >= t, "build_weights requires T >= t");
    WeightTensor wt;
    wt.grid = grid;
    wt.t = t;
    wt.T = T;
    wt.d = spec.d;
    wt.m = spec.m;
    wt.first = grid->index_of(t);
    wt.cells_T = grid->index_of(T) - wt.first;
    wt.n_nodes = grid->size() - wt.first;
    const std::size_t dm = wt.d * wt.m;
    wt.row_offset.resize(wt.n_nodes);
    std::size_t off = 0;
    for (std::size_t k = 0; k < wt.n_nodes; ++k) {
        wt.row_offset[k] = off;
        off += k;
    }
    wt.w.assign(off * dm, 0.0);
    wt.resid.assign(wt.n_nodes * wt.d * wt.d, 0.0);
    wt.sqrt_h.resize(wt.n_cells());
    const auto& g = *grid;
    for (std::size_t c = 0; c < wt.n_cells(); ++c) wt.sqrt_h[c] = std::sqrt(g[wt.first + c + 1] - g[wt.first + c]);
    if (spec.is_zero()) return wt;
    for (std::size_t k = 1; k < wt.n_nodes; ++k) {
        const double s = g[wt.first + k];
        for (std::size_t c = 0; c < k; ++c) {
            const double a = g[wt.first + c], b = g[wt.first + c + 1];
            const Eigen::MatrixXd block = cell_integral(spec, s, a, b) / (b - a);
            double* dst = wt.w.data() + (wt.row_offset[k] + c) * dm;
            for (std::size_t i = 0; i < wt.d; ++i)
                for (std::size_t j = 0; j < wt.m; ++j) dst[i * wt.m + j] = block(i, j);
        }
        const double a = g[wt.first + k - 1];
        const double h = s - a;
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> wk(
            wt.weight(k, k - 1), static_cast<long>(wt.d), static_cast<long>(wt.m));
        Eigen::MatrixXd S = covariance_entry(spec, s, s, a, s) - h * wk * wk.transpose();
        const double scale = std::max(1e-300, covariance_entry(spec, s, s, a, s).diagonal().maxCoeff());
        if (S.diagonal().maxCoeff() > 1e-13 * scale) {
            const Eigen::MatrixXd L = psd_factor(S);
            double* dst = wt.resid.data() + k * wt.d * wt.d;
            for (std::size_t i = 0; i < wt.d; ++i)
                for (std::size_t j = 0; j < wt.d; ++j) dst[i * wt.d + j] = L(i, j);
        }
    }
    return wt;
}

std::size_t pairs_per_cell(std::size_t m, std::size_t d) { return (m + d + 1) / 2; }

void Increments::draw(const WeightTensor& wt, std::uint64_t seed, std::uint64_t path, std::int64_t key_offset,
                      std::size_t cell_begin) {
    m = wt.m;
    d = wt.d;
    first_cell = wt.first;
    const std::size_t nc = wt.n_cells();
    dW.assign(nc * m, 0.0);
    Z.assign(nc * d, 0.0);
    if (cell_begin >= nc) return;
    const std::size_t P = pairs_per_cell(m, d);
    std::vector<double> buf(2 * P * (nc - cell_begin));
    const std::int64_t key_cell = static_cast<std::int64_t>(first_cell + cell_begin) + key_offset;
    require(key_cell >= 0, "increment keys must be non-negative");
    fill_normal_pairs(seed, path, static_cast<std::uint64_t>(key_cell) * P, P * (nc - cell_begin), buf.data());
    for (std::size_t c = cell_begin; c < nc; ++c) {
        const double* z = buf.data() + 2 * P * (c - cell_begin);
        for (std::size_t j = 0; j < m; ++j) dW[c * m + j] = wt.sqrt_h[c] * z[j];
        for (std::size_t i = 0; i < d; ++i) Z[c * d + i] = z[m + i];
    }
}

void Increments::negate() {
    for (double& x : dW) x = -x;
    for (double& x : Z) x = -x;
}

void accumulate_node(const WeightTensor& wt, const Increments& inc, std::size_t k, std::size_t c0, std::size_t c1,
                     double* out) {
    const std::size_t end = std::min(k, c1);
    if (wt.d == 1 && wt.m == 1) {
        const double* w = wt.weight(k, 0);
        double acc = 0.0;
        for (std::size_t c = c0; c < end; ++c) acc += w[c] * inc.dW[c];
        if (k >= 1 && k - 1 >= c0 && k - 1 < end) acc += wt.resid[k] * inc.Z[k - 1];
        out[0] += acc;
        return;
    }
    const std::size_t d = wt.d, m = wt.m;
    for (std::size_t c = c0; c < end; ++c) {
        const double* w = wt.weight(k, c);
        const double* dw = inc.dW.data() + c * m;
        for (std::size_t i = 0; i < d; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) acc += w[i * m + j] * dw[j];
            out[i] += acc;
        }
    }
    if (k >= 1 && k - 1 >= c0 && k - 1 < end) {
        const double* R = wt.residual(k);
        const double* z = inc.Z.data() + (k - 1) * d;
        for (std::size_t i = 0; i < d; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) acc += R[i * d + j] * z[j];
            out[i] += acc;
        }
    }
}

GaussianBatch simulate(const KernelSpec& spec, GridPtr grid, double t, double T, std::size_t M, std::uint64_t seed,
                       int workers) {
    require(M >= 1, "simulate needs M >= 1");
    const WeightTensor wt = build_weights(spec, grid, t, T);
    GaussianBatch b;
    b.M = M;
    b.seed = seed;
    b.grid = grid;
    b.t = t;
    b.T = T;
    b.d = wt.d;
    b.n_nodes = wt.n_nodes;
    b.shared_increments = true;
    const std::size_t stride = wt.n_nodes * wt.d;
    b.I_paths.assign(M * stride, 0.0);
    b.J_paths.assign(M * stride, 0.0);
    parallel_for(M, workers, [&](std::size_t p) {
        Increments inc;
        inc.draw(wt, seed, p);
        for (std::size_t k = 0; k < wt.n_nodes; ++k) {
            double* J = b.J_paths.data() + p * stride + k * wt.d;
            double* I = b.I_paths.data() + p * stride + k * wt.d;
            accumulate_node(wt, inc, k, 0, wt.cells_T, J);
            if (k <= wt.cells_T) {
                for (std::size_t i = 0; i < wt.d; ++i) I[i] = J[i];
            } else {
                accumulate_node(wt, inc, k, 0, wt.n_cells(), I);
            }
        }
    });
    return b;
}

GaussianBatch simulate_exact(const KernelSpec& spec, GridPtr grid, double t, double T, std::size_t M,
                             std::uint64_t seed) {
    require(M >= 1, "simulate_exact needs M >= 1");
    const auto& g = *grid;
    const std::size_t first = g.index_of(t);
    g.index_of(T);
    const std::size_t n = g.size() - first;
    const std::size_t d = spec.d;
    const std::size_t N = n * d;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<long>(N), static_cast<long>(N));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = k; l < n; ++l) {
            const double sk = g[first + k], sl = g[first + l];
            const double upper = std::min({sk, sl, T});
            if (!(upper > t)) continue;
            const Eigen::MatrixXd block = covariance_entry(spec, sk, sl, t, upper);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    C(static_cast<long>(k * d + i), static_cast<long>(l * d + j)) = block(i, j);
                    C(static_cast<long>(l * d + j), static_cast<long>(k * d + i)) = block(i, j);
                }
        }
    std::vector<long> active;
    for (long i = 0; i < static_cast<long>(N); ++i)
        if (C(i, i) > 0.0) active.push_back(i);
    const long na = static_cast<long>(active.size());
    Eigen::MatrixXd L;
    if (na > 0) {
        Eigen::MatrixXd A(na, na);
        for (long i = 0; i < na; ++i)
            for (long j = 0; j < na; ++j) A(i, j) = C(active[i], active[j]);
        const double scale = A.diagonal().maxCoeff();
        bool ok = false;
        for (double jitter = 1e-12; jitter <= 1e-8 * 1.0001; jitter *= 10.0) {
            Eigen::MatrixXd B = A;
            B.diagonal().array() += jitter * scale;
            Eigen::LLT<Eigen::MatrixXd> llt(B);
            if (llt.info() == Eigen::Success) {
                L = llt.matrixL();
                ok = true;
                break;
            }
        }
        if (!ok) fail(ErrorCode::factorization_failure, "covariance factorisation failed after jitter 1e-8");
    }
    GaussianBatch b;
    b.M = M;
    b.seed = seed;
    b.grid = grid;
    b.t = t;
    b.T = T;
    b.d = d;
    b.n_nodes = n;
    b.shared_increments = false;
    b.J_paths.assign(M * N, 0.0);
    const std::uint64_t sub = derive_seed(seed, 0x65786163ull);
    const std::size_t pairs = (static_cast<std::size_t>(na) + 1) / 2;
    std::vector<double> z(2 * pairs);
    for (std::size_t p = 0; p < M; ++p) {
        if (na == 0) break;
        fill_normal_pairs(sub, p, 0, pairs, z.data());
        Eigen::Map<const Eigen::VectorXd> zv(z.data(), na);
        const Eigen::VectorXd x = L.triangularView<Eigen::Lower>() * zv;
        for (long i = 0; i < na; ++i) b.J_paths[p * N + static_cast<std::size_t>(active[i])] = x(i);
    }
    return b;
}

PathSample theta_path(const WeightTensor& wt0t, const PathSample& gamma, const Increments& inc) {
    require(wt0t.first == 0, "theta_path needs a tensor starting at time zero");
    if (!(*gamma.grid == *wt0t.grid)) fail(ErrorCode::grid_mismatch, "gamma lives on a different grid");
    PathSample out = gamma;
    for (std::size_t k = 0; k < wt0t.n_nodes; ++k) accumulate_node(wt0t, inc, k, 0, wt0t.cells_T, out.at(k));
    return out;
}

}  // namespace volpath
