#include "volpath/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "volpath/error.hpp"
#include "volpath/rng.hpp"

namespace volpath {

namespace {

GaussHermite compute_gh(int order) {
    // Jacobi matrix of the monic probabilists' Hermite recurrence.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussHermite gh;
    gh.nodes.resize(order);
    gh.weights.resize(order);
    for (int k = 0; k < order; ++k) {
        gh.nodes[k] = es.eigenvalues()(k);
        const double v = es.eigenvectors()(0, k);
        gh.weights[k] = v * v;
    }
    // Symmetrise: the exact rule is symmetric about zero.
    for (int k = 0; k < order / 2; ++k) {
        const int j = order - 1 - k;
        const double x = 0.5 * (gh.nodes[j] - gh.nodes[k]);
        const double w = 0.5 * (gh.weights[j] + gh.weights[k]);
        gh.nodes[k] = -x;
        gh.nodes[j] = x;
        gh.weights[k] = gh.weights[j] = w;
    }
    if (order % 2 == 1) gh.nodes[order / 2] = 0.0;
    double total = 0.0;
    for (double w : gh.weights) total += w;
    for (double& w : gh.weights) w /= total;
    return gh;
}

}  // namespace

GaussHermite gauss_hermite(int order) {
    require(order >= 1 && order <= 256, "Gauss-Hermite order must lie in [1, 256]");
    static std::mutex mu;
    static std::map<int, GaussHermite> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gh(order)).first;
    return it->second;
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& sigma) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (sigma + sigma.transpose()));
    Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal();
}

GaussianRule gaussian_rule(const Eigen::MatrixXd& sigma, int gh_order, int inner_mc,
                           std::uint64_t seed) {
    const long d = sigma.rows();
    GaussianRule rule;
    if (sigma.isZero(0.0)) {
        rule.nodes = Eigen::MatrixXd::Zero(d, 1);
        rule.weights = {1.0};
        return rule;
    }
    const Eigen::MatrixXd L = psd_factor(sigma);
    if (d <= 3) {
        const GaussHermite gh = gauss_hermite(gh_order);
        long n = 1;
        for (long k = 0; k < d; ++k) n *= gh_order;
        rule.nodes.resize(d, n);
        rule.weights.resize(n);
        Eigen::VectorXd z(d);
        for (long idx = 0; idx < n; ++idx) {
            long rem = idx;
            double w = 1.0;
            for (long k = 0; k < d; ++k) {
                const long j = rem % gh_order;
                rem /= gh_order;
                z(k) = gh.nodes[j];
                w *= gh.weights[j];
            }
            rule.nodes.col(idx) = L * z;
            rule.weights[idx] = w;
        }
        return rule;
    }
    require(inner_mc >= 2, "inner_mc must be at least 2");
    const long half = inner_mc / 2;
    const long pairs_per_draw = (d + 1) / 2;
    rule.nodes.resize(d, 2 * half);
    rule.weights.assign(2 * half, 1.0 / static_cast<double>(2 * half));
    std::vector<double> buf(2 * pairs_per_draw);
    Eigen::VectorXd z(d);
    for (long i = 0; i < half; ++i) {
        fill_normal_pairs(seed, static_cast<std::uint64_t>(i), 0, pairs_per_draw, buf.data());
        for (long k = 0; k < d; ++k) z(k) = buf[k];
        rule.nodes.col(2 * i) = L * z;
        rule.nodes.col(2 * i + 1) = -(L * z);
    }
    return rule;
}

}  // namespace volpath
