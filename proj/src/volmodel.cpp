#include "volpath/volmodel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "volpath/error.hpp"

namespace volpath {

namespace {

constexpr double kExpCap = 700.0;

double hyp(double x) {
    const double r = std::sqrt(x * x + 1.0);
    return x >= 0.0 ? x + r : 1.0 / (r - x);
}
double hyp_d1(double x) { return 1.0 + x / std::sqrt(x * x + 1.0); }
double hyp_d2(double x) {
    const double q = x * x + 1.0;
    return 1.0 / (q * std::sqrt(q));
}

}  // namespace

double guarded_exp(double x, Diagnostics* diag) {
    if (x > kExpCap) {
        if (diag) ++diag->overflow_events;
        return std::exp(kExpCap);
    }
    return std::exp(x);
}

std::string to_string(VolFamily family) {
    switch (family) {
        case VolFamily::one_factor_bergomi: return "one-factor-bergomi";
        case VolFamily::multi_factor_bergomi: return "multi-factor-bergomi";
        case VolFamily::hyperbolic: return "hyperbolic";
        case VolFamily::mixed_hyperbolic_quadratic: return "mixed-hyperbolic-quadratic";
        case VolFamily::quintic_ou: return "quintic-ou";
        case VolFamily::custom: return "custom";
    }
    return "unknown";
}

VolFamily vol_family_from_string(const std::string& name) {
    for (auto f : {VolFamily::one_factor_bergomi, VolFamily::multi_factor_bergomi, VolFamily::hyperbolic,
                   VolFamily::mixed_hyperbolic_quadratic, VolFamily::quintic_ou, VolFamily::custom})
        if (to_string(f) == name) return f;
    fail(ErrorCode::config, "unknown volatility family '" + name + "'");
}

PiecewiseLinear::PiecewiseLinear(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
    require(!points_.empty(), "curve needs at least one point", ErrorCode::config);
    std::sort(points_.begin(), points_.end());
    for (std::size_t i = 1; i < points_.size(); ++i)
        require(points_[i].first > points_[i - 1].first, "curve tenors must be distinct", ErrorCode::config);
}

double PiecewiseLinear::operator()(double s) const {
    if (s <= points_.front().first) return points_.front().second;
    if (s >= points_.back().first) return points_.back().second;
    auto it = std::upper_bound(points_.begin(), points_.end(), s,
                               [](double v, const std::pair<double, double>& p) { return v < p.first; });
    const auto& [t1, v1] = *it;
    const auto& [t0, v0] = *(it - 1);
    const double w = (s - t0) / (t1 - t0);
    return v0 + w * (v1 - v0);
}

bool PiecewiseLinear::is_constant(double value) const {
    return std::all_of(points_.begin(), points_.end(), [&](const auto& p) { return p.second == value; });
}

double gaussian_moment(int n, double v) {
    if (n % 2 == 1) return 0.0;
    double r = 1.0;
    for (int k = n - 1; k > 0; k -= 2) r *= k;
    return r * std::pow(v, n / 2);
}

VolModel VolModel::one_factor_bergomi(double zeta, double nu) {
    VolModel m;
    m.family = VolFamily::one_factor_bergomi;
    m.zeta = PiecewiseLinear::constant(zeta);
    m.nu = nu;
    return m;
}

VolModel VolModel::from_functions(std::size_t d, CustomVolFns fns, std::pair<double, double> support) {
    VolModel m;
    m.family = VolFamily::custom;
    m.d = d;
    m.support = support;
    m.custom = std::make_shared<const CustomVolFns>(std::move(fns));
    m.validate();
    // Trust but verify: central differences at a few points of the support.
    std::mt19937_64 gen(12345);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(support.first, support.second);
    const double h = 1e-5;
    for (int trial = 0; trial < 5; ++trial) {
        const double s = ud(gen);
        Eigen::VectorXd x(d);
        for (auto& v : x) v = nd(gen);
        const Eigen::VectorXd g = m.custom->grad(s, x);
        const Eigen::MatrixXd H = m.custom->hess(s, x);
        for (std::size_t k = 0; k < d; ++k) {
            Eigen::VectorXd xp = x, xm = x;
            xp(k) += h;
            xm(k) -= h;
            const double fd = (m.custom->f(s, xp) - m.custom->f(s, xm)) / (2 * h);
            const Eigen::VectorXd gd = (m.custom->grad(s, xp) - m.custom->grad(s, xm)) / (2 * h);
            const double scale = 1.0 + std::abs(g(k));
            require(std::abs(fd - g(k)) <= 1e-4 * scale, "custom gradient disagrees with finite differences",
                    ErrorCode::config);
            for (std::size_t j = 0; j < d; ++j)
                require(std::abs(gd(j) - H(j, k)) <= 1e-3 * (1.0 + std::abs(H(j, k))),
                        "custom Hessian disagrees with finite differences", ErrorCode::config);
        }
    }
    return m;
}

VolModel VolModel::with_kernel(const KernelSpec& spec) const {
    VolModel m = *this;
    m.kernel = std::make_shared<const KernelSpec>(spec);
    if (family != VolFamily::custom) m.d = spec.d;
    return m;
}

VolModel VolModel::with_support(double a, double b) const {
    VolModel m = *this;
    m.support = std::make_pair(a, b);
    return m;
}

VolModel VolModel::shifted(double t) const {
    VolModel m = *this;
    m.time_offset = time_offset + t;
    return m;
}

bool VolModel::in_support(double s) const {
    const double abs_s = s + time_offset;
    if (!support) return true;
    return abs_s >= support->first && abs_s <= support->second;
}

Eigen::MatrixXd VolModel::variance(double s) const {
    if (!kernel) fail(ErrorCode::config, "volatility model has no kernel for its variance curve");
    const double abs_s = s + time_offset;
    if (abs_s <= 0.0) return Eigen::MatrixXd::Zero(kernel->d, kernel->d);
    return covariance_entry(*kernel, abs_s, abs_s, 0.0, abs_s);
}

void VolModel::validate() const {
    require(d >= 1, "model dimension must be positive", ErrorCode::config);
    if (support) require(support->first <= support->second, "support must be an interval", ErrorCode::config);
    for (const auto& p : zeta.points()) require(p.second >= 0.0, "zeta must be non-negative", ErrorCode::config);
    switch (family) {
        case VolFamily::mixed_hyperbolic_quadratic:
            require(d == 2, "mixed-hyperbolic-quadratic needs d = 2", ErrorCode::config);
            [[fallthrough]];
        case VolFamily::multi_factor_bergomi:
        case VolFamily::hyperbolic:
            if (!lambdas.empty()) {
                require(lambdas.size() == d, "lambdas must have one weight per factor", ErrorCode::config);
                double sum = 0.0;
                for (double l : lambdas) {
                    require(l >= 0.0, "lambdas must be non-negative", ErrorCode::config);
                    sum += l;
                }
                require(std::abs(sum - 1.0) <= 1e-9, "lambdas must sum to one", ErrorCode::config);
            }
            break;
        case VolFamily::quintic_ou:
            for (double a : alphas) require(a >= 0.0, "quintic alphas must be non-negative", ErrorCode::config);
            break;
        case VolFamily::custom:
            require(custom && custom->f && custom->grad && custom->hess, "custom model needs f, grad and hess",
                    ErrorCode::config);
            break;
        default: break;
    }
}

VolSlice VolModel::slice(double s) const {
    VolSlice sl;
    sl.family = family;
    sl.s = s + time_offset;
    sl.d = d;
    sl.nu = nu;
    sl.active = in_support(s);
    sl.zeta = zeta(s + time_offset);
    sl.alphas = alphas;
    sl.custom = custom.get();
    if (!sl.active) return sl;
    sl.lambdas = lambdas;
    if (sl.lambdas.empty()) sl.lambdas.assign(d, 1.0 / static_cast<double>(d));
    switch (family) {
        case VolFamily::one_factor_bergomi:
        case VolFamily::multi_factor_bergomi: {
            const Eigen::MatrixXd v = variance(s);
            sl.var_diag.resize(d);
            for (std::size_t i = 0; i < d; ++i) sl.var_diag[i] = v(i, i);
            break;
        }
        case VolFamily::mixed_hyperbolic_quadratic: {
            const Eigen::MatrixXd v = variance(s);
            sl.var_diag = {v(0, 0), v(1, 1)};
            sl.inv_norm = 1.0 / (1.0 + v(1, 1));
            break;
        }
        case VolFamily::quintic_ou: {
            const double v = variance(s)(0, 0);
            const double a[6] = {alphas[0], alphas[1], 0.0, alphas[2], 0.0, alphas[3]};
            double norm = 0.0;
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j)
                    if (a[i] != 0.0 && a[j] != 0.0) norm += a[i] * a[j] * gaussian_moment(i + j, v);
            if (!(norm > 0.0)) fail(ErrorCode::domain, "quintic normaliser E[p^2] vanishes");
            sl.var_diag = {v};
            sl.inv_norm = 1.0 / norm;
            break;
        }
        default: break;
    }
    return sl;
}

double VolSlice::eval(const double* x, double* grad, double* hess, Diagnostics* diag) const {
    if (grad) std::fill(grad, grad + d, 0.0);
    if (hess) std::fill(hess, hess + d * d, 0.0);
    if (!active) return 0.0;
    switch (family) {
        case VolFamily::one_factor_bergomi: {
            const double f = zeta * guarded_exp(nu * x[0] - 0.5 * nu * nu * var_diag[0], diag);
            if (grad) grad[0] = nu * f;
            if (hess) hess[0] = nu * nu * f;
            return f;
        }
        case VolFamily::multi_factor_bergomi: {
            double f = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double e = zeta * lambdas[i] * guarded_exp(x[i] - 0.5 * var_diag[i], diag);
                f += e;
                if (grad) grad[i] = e;
                if (hess) hess[i * d + i] = e;
            }
            return f;
        }
        case VolFamily::hyperbolic: {
            double f = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                f += zeta * lambdas[i] * hyp(x[i]);
                if (grad) grad[i] = zeta * lambdas[i] * hyp_d1(x[i]);
                if (hess) hess[i * d + i] = zeta * lambdas[i] * hyp_d2(x[i]);
            }
            return f;
        }
        case VolFamily::mixed_hyperbolic_quadratic: {
            const double l0 = lambdas[0], l1 = lambdas[1];
            const double f = zeta * (l0 * hyp(x[0]) + l1 * (1.0 + x[1] * x[1]) * inv_norm);
            if (grad) {
                grad[0] = zeta * l0 * hyp_d1(x[0]);
                grad[1] = zeta * l1 * 2.0 * x[1] * inv_norm;
            }
            if (hess) {
                hess[0] = zeta * l0 * hyp_d2(x[0]);
                hess[3] = zeta * l1 * 2.0 * inv_norm;
            }
            return f;
        }
        case VolFamily::quintic_ou: {
            const double y = x[0], y2 = y * y;
            const auto& a = alphas;
            const double p = a[0] + y * (a[1] + y2 * (a[2] + y2 * a[3]));
            const double p1 = a[1] + y2 * (3.0 * a[2] + 5.0 * a[3] * y2);
            const double p2 = y * (6.0 * a[2] + 20.0 * a[3] * y2);
            if (grad) grad[0] = 2.0 * zeta * p * p1 * inv_norm;
            if (hess) hess[0] = 2.0 * zeta * (p1 * p1 + p * p2) * inv_norm;
            return zeta * p * p * inv_norm;
        }
        case VolFamily::custom: {
            const Eigen::Map<const Eigen::VectorXd> xv(x, static_cast<long>(d));
            const Eigen::VectorXd xx = xv;
            if (grad) {
                const Eigen::VectorXd g = custom->grad(s, xx);
                std::copy(g.data(), g.data() + d, grad);
            }
            if (hess) {
                const Eigen::MatrixXd h = custom->hess(s, xx);
                for (std::size_t i = 0; i < d; ++i)
                    for (std::size_t j = 0; j < d; ++j) hess[i * d + j] = h(i, j);
            }
            return custom->f(s, xx);
        }
    }
    return 0.0;
}

std::optional<std::vector<VolSlice::ExpTerm>> VolSlice::exp_affine() const {
    std::vector<ExpTerm> terms;
    if (family == VolFamily::one_factor_bergomi) {
        if (!active) return terms;
        std::vector<double> b(d, 0.0);
        b[0] = nu;
        terms.push_back({zeta * std::exp(-0.5 * nu * nu * var_diag[0]), b});
        return terms;
    }
    if (family == VolFamily::multi_factor_bergomi) {
        if (!active) return terms;
        for (std::size_t i = 0; i < d; ++i) {
            std::vector<double> b(d, 0.0);
            b[i] = 1.0;
            terms.push_back({zeta * lambdas[i] * std::exp(-0.5 * var_diag[i]), b});
        }
        return terms;
    }
    return std::nullopt;
}

double f(const VolModel& model, double s, const Eigen::VectorXd& x) {
    return model.slice(s).f(x.data());
}

Eigen::VectorXd grad_f(const VolModel& model, double s, const Eigen::VectorXd& x) {
    Eigen::VectorXd g(x.size());
    model.slice(s).eval(x.data(), g.data(), nullptr);
    return g;
}

Eigen::MatrixXd hess_f(const VolModel& model, double s, const Eigen::VectorXd& x) {
    const long d = x.size();
    std::vector<double> h(d * d);
    model.slice(s).eval(x.data(), nullptr, h.data());
    Eigen::MatrixXd out(d, d);
    for (long i = 0; i < d; ++i)
        for (long j = 0; j < d; ++j) out(i, j) = h[i * d + j];
    return out;
}

}  // namespace volpath
