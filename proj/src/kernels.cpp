#include "volpath/kernels.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <queue>

#include "volpath/error.hpp"

namespace volpath {

namespace {

constexpr double kQuadTol = 1e-10;
constexpr int kMaxPieces = 4000;

bool power_like(KernelFamily f) { return f == KernelFamily::power_law || f == KernelFamily::fbm_shifted; }

// Global adaptive Gauss-Kronrod: keep splitting the piece with the largest
// error. Boost's recursive driver reports errors in unscaled [-1,1] units, so
// only its fixed 21-point rule is used here.
struct Piece {
    double a, b, value, err, l1;
    bool operator<(const Piece& o) const { return err < o.err; }
};

template <class F>
Piece gk_piece(F& g, double a, double b) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double err = 0.0, l1 = 0.0;
    const double v = GK::integrate([&](double x) { return g(mid + half * x); }, -1.0, 1.0, 0, 0.0, &err, &l1);
    return {a, b, half * v, half * err, half * l1};
}

template <class F>
double gk(F&& g, double a, double b) {
    if (!(b > a)) return 0.0;
    std::priority_queue<Piece> pieces;
    pieces.push(gk_piece(g, a, b));
    double v = pieces.top().value, err = pieces.top().err, l1 = pieces.top().l1;
    for (int n = 1; n < kMaxPieces && std::isfinite(v) && err > kQuadTol * l1 + 1e-300; ++n) {
        const Piece p = pieces.top();
        const double mid = 0.5 * (p.a + p.b);
        if (!(mid > p.a && mid < p.b)) break;
        pieces.pop();
        const Piece left = gk_piece(g, p.a, mid), right = gk_piece(g, mid, p.b);
        v += left.value + right.value - p.value;
        err += left.err + right.err - p.err;
        l1 += left.l1 + right.l1 - p.l1;
        pieces.push(left);
        pieces.push(right);
    }
    if (std::isfinite(v) && err <= kQuadTol * l1 + 1e-300) return v;
    // Fractional powers at an endpoint slow Gauss-Kronrod down; tanh-sinh does not mind.
    boost::math::quadrature::tanh_sinh<double> ts;
    double err2 = 0.0, l2 = 0.0;
    const double w = ts.integrate(g, a, b, kQuadTol, &err2, &l2);
    // Otherwise two unrelated rules agreeing to the tolerance is accepted as convergence.
    const bool agree = std::isfinite(v) && std::abs(w - v) <= kQuadTol * std::max(l1, l2);
    if (!std::isfinite(w) || (err2 > kQuadTol * l2 + 1e-300 && !agree))
        fail(ErrorCode::quadrature_nonconvergence, "adaptive Gauss-Kronrod missed tolerance 1e-10");
    return w;
}

// int_lo^hi g(u) du where g(u) ~ u^alpha near u = 0. For alpha in (-1,0) the
// substitution v = u^(alpha+1) makes the integrand bounded; for alpha near -1
// the logarithmic substitution u = exp(-w) is used instead, as it is whenever
// g carries a log(1/u) factor that the power substitution leaves non-smooth.
template <class F>
double singular_quad(F&& g, double alpha, double lo, double hi, bool log_factor = false) {
    if (!(hi > lo)) return 0.0;
    if ((alpha >= 0.0 && !log_factor) || lo > 0.5 * hi) return gk(g, lo, hi);
    if (alpha > -0.95 && !log_factor) {
        const double p = alpha + 1.0;
        const double ip = 1.0 / p;
        auto h = [&](double v) {
            const double u = v > 0.0 ? std::pow(v, ip) : 0.0;
            if (u <= 0.0) return 0.0;  // underflow; the weight there is negligible
            return g(u) * u / (p * v);
        };
        return gk(h, std::pow(lo, p), std::pow(hi, p));
    }
    auto h = [&](double w) {
        const double u = std::exp(-w);
        return u > 0.0 ? g(u) * u : 0.0;
    };
    const double w_hi = -std::log(hi);
    if (lo > 0.0) return gk(h, w_hi, -std::log(lo));
    double err = 0.0, l1 = 0.0;
    boost::math::quadrature::exp_sinh<double> es;
    const double v = es.integrate(h, w_hi, std::numeric_limits<double>::infinity(), kQuadTol, &err, &l1);
    if (!std::isfinite(v) || err > 10 * kQuadTol * l1 + 1e-300)
        fail(ErrorCode::quadrature_nonconvergence, "exp-sinh quadrature missed tolerance");
    return v;
}

// Splits [lo,hi] at the given interior points and integrates each piece.
template <class F>
double split_quad(F&& g, double alpha, double lo, double hi, std::vector<double> cuts, bool log_factor = false) {
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    double a = lo;
    const double slack = 1e-9 * (hi - lo);
    for (double c : cuts) {
        if (c > a + slack && c < hi - slack) {
            total += singular_quad(g, a == lo ? alpha : 0.0, a, c, a == lo && log_factor);
            a = c;
        }
    }
    total += singular_quad(g, a == lo ? alpha : 0.0, a, hi, a == lo && log_factor);
    return total;
}

double log_kink(const ScalarKernel& k) { return std::exp(-1.0 / k.zeta_log); }

}  // namespace

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::exponential: return "exponential";
        case KernelFamily::power_law: return "power-law";
        case KernelFamily::gamma: return "gamma";
        case KernelFamily::fbm_shifted: return "fbm-shifted";
        case KernelFamily::log_fbm: return "log-fbm";
        case KernelFamily::matrix_composite: return "matrix-composite";
        case KernelFamily::custom: return "custom";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
    for (auto f : {KernelFamily::exponential, KernelFamily::power_law, KernelFamily::gamma,
                   KernelFamily::fbm_shifted, KernelFamily::log_fbm, KernelFamily::matrix_composite,
                   KernelFamily::custom})
        if (to_string(f) == name) return f;
    fail(ErrorCode::config, "unknown kernel family '" + name + "'");
}

double ScalarKernel::exponent() const { return family == KernelFamily::exponential ? 0.0 : H - 0.5; }

bool ScalarKernel::finite_at_zero() const { return vanishes() || exponent() >= 0.0; }

double ScalarKernel::operator()(double u) const {
    if (u < 0.0 || c == 0.0) return 0.0;
    if (u == 0.0) {
        if (!finite_at_zero())
            fail(ErrorCode::undefined_at_diagonal, "singular kernel evaluated on the diagonal");
        switch (family) {
            case KernelFamily::exponential: return c;
            case KernelFamily::log_fbm: return 0.0;
            default: return H == 0.5 ? c : 0.0;
        }
    }
    switch (family) {
        case KernelFamily::exponential: return c * std::exp(-beta * u);
        case KernelFamily::power_law:
        case KernelFamily::fbm_shifted: return c * std::pow(u, H - 0.5);
        case KernelFamily::gamma: return c * std::exp(-beta * u) * std::pow(u, H - 0.5);
        case KernelFamily::log_fbm:
            return c * std::pow(u, H - 0.5) * std::pow(std::max(zeta_log * std::log(1.0 / u), 1.0), -p_log);
        default: fail(ErrorCode::invalid_argument, "scalar kernel with a non-scalar family");
    }
}

void ScalarKernel::validate() const {
    require(std::isfinite(c), "kernel scale c must be finite", ErrorCode::config);
    require(beta >= 0.0, "kernel beta must be non-negative", ErrorCode::config);
    switch (family) {
        case KernelFamily::exponential: break;
        case KernelFamily::power_law:
        case KernelFamily::fbm_shifted:
        case KernelFamily::gamma:
            require(H > 0.0 && H < 1.0, "kernel H must lie in (0,1)", ErrorCode::config);
            break;
        case KernelFamily::log_fbm:
            require(H >= 0.0 && H < 0.5, "log-fbm H must lie in [0,1/2)", ErrorCode::config);
            require(zeta_log > 0.0 && p_log > 1.0, "log-fbm needs zeta_log > 0 and p_log > 1",
                    ErrorCode::config);
            break;
        default: fail(ErrorCode::config, "entries must be scalar kernel families");
    }
}

KernelSpec KernelSpec::scalar(const ScalarKernel& k, std::size_t d, std::size_t m) {
    KernelSpec s;
    s.family = k.family;
    s.base = k;
    s.d = d;
    s.m = m;
    s.validate();
    return s;
}

KernelSpec KernelSpec::exponential(double c, double beta) {
    return scalar({KernelFamily::exponential, c, beta, 0.5, 1.0, 2.0});
}
KernelSpec KernelSpec::power_law(double c, double H) { return scalar({KernelFamily::power_law, c, 0.0, H, 1.0, 2.0}); }
KernelSpec KernelSpec::gamma(double c, double beta, double H) {
    return scalar({KernelFamily::gamma, c, beta, H, 1.0, 2.0});
}
KernelSpec KernelSpec::log_fbm(double c, double H, double zeta_log, double p_log) {
    return scalar({KernelFamily::log_fbm, c, 0.0, H, zeta_log, p_log});
}
KernelSpec KernelSpec::zero(std::size_t d, std::size_t m) {
    return scalar({KernelFamily::exponential, 0.0, 0.0, 0.5, 1.0, 2.0}, d, m);
}

KernelSpec KernelSpec::composite(std::size_t d, std::size_t m, std::vector<ScalarKernel> entries) {
    KernelSpec s;
    s.family = KernelFamily::matrix_composite;
    s.d = d;
    s.m = m;
    s.entries = std::move(entries);
    s.validate();
    return s;
}

KernelSpec KernelSpec::from_function(std::size_t d, std::size_t m, CustomFn fn) {
    KernelSpec s;
    s.family = KernelFamily::custom;
    s.d = d;
    s.m = m;
    s.custom = std::move(fn);
    s.validate();
    return s;
}

std::optional<ScalarKernel> KernelSpec::entry(std::size_t i, std::size_t j) const {
    if (family == KernelFamily::matrix_composite) {
        const ScalarKernel& k = entries[i * m + j];
        if (k.vanishes()) return std::nullopt;
        return k;
    }
    if (family == KernelFamily::custom || i != j || base.vanishes()) return std::nullopt;
    return base;
}

bool KernelSpec::is_zero() const {
    if (family == KernelFamily::custom) return false;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (entry(i, j)) return false;
    return true;
}

double KernelSpec::min_exponent() const {
    if (family == KernelFamily::custom) return 0.0;
    double a = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (auto k = entry(i, j)) a = std::min(a, k->exponent());
    return a;
}

void KernelSpec::validate() const {
    require(d >= 1 && m >= 1, "kernel dimensions d and m must be positive", ErrorCode::config);
    if (family == KernelFamily::custom) {
        require(static_cast<bool>(custom), "custom kernel needs a callback", ErrorCode::config);
    } else if (family == KernelFamily::matrix_composite) {
        require(entries.size() == d * m, "matrix-composite kernel needs d*m entries", ErrorCode::config);
        for (const auto& e : entries) e.validate();
    } else {
        require(base.family == family, "kernel base family mismatch", ErrorCode::config);
        base.validate();
    }
}

Eigen::MatrixXd eval(const KernelSpec& spec, double s, double t) {
    if (spec.family == KernelFamily::custom) {
        if (s < t) return Eigen::MatrixXd::Zero(spec.d, spec.m);
        return spec.custom(s, t);
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(spec.d, spec.m);
    if (s < t) return out;
    const double u = s - t;
    for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = 0; j < spec.m; ++j)
            if (auto k = spec.entry(i, j)) out(i, j) = (*k)(u);
    return out;
}

Eigen::MatrixXd eval_truncated(const KernelSpec& spec, double delta, double s, double t) {
    require(delta > 0.0, "truncation delta must be positive");
    return eval(spec, std::max(s, t + delta), t);
}

double lag_integral(const ScalarKernel& k, double lo, double hi) {
    if (k.vanishes() || !(hi > lo)) return 0.0;
    switch (k.family) {
        case KernelFamily::exponential:
            if (k.beta == 0.0) return k.c * (hi - lo);
            return -k.c * std::exp(-k.beta * lo) * std::expm1(-k.beta * (hi - lo)) / k.beta;
        case KernelFamily::power_law:
        case KernelFamily::fbm_shifted: {
            const double a = k.H + 0.5;
            return k.c * (std::pow(hi, a) - std::pow(lo, a)) / a;
        }
        case KernelFamily::gamma: return singular_quad([&](double u) { return k(u); }, k.exponent(), lo, hi);
        case KernelFamily::log_fbm:
            return split_quad([&](double u) { return k(u); }, k.exponent(), lo, hi, {log_kink(k)}, true);
        default: fail(ErrorCode::invalid_argument, "lag integral of a non-scalar kernel");
    }
}

double lag_product_integral(const ScalarKernel& k1, const ScalarKernel& k2, double lo, double hi,
                            double D) {
    if (k1.vanishes() || k2.vanishes() || !(hi > lo)) return 0.0;
    if (k1.family == KernelFamily::exponential && k2.family == KernelFamily::exponential) {
        const double b = k1.beta + k2.beta;
        const double scale = k1.c * k2.c * std::exp(-k2.beta * D);
        if (b == 0.0) return scale * (hi - lo);
        return -scale * std::exp(-b * lo) * std::expm1(-b * (hi - lo)) / b;
    }
    if (D == 0.0 && power_like(k1.family) && power_like(k2.family)) {
        const double a = k1.H + k2.H;
        return k1.c * k2.c * (std::pow(hi, a) - std::pow(lo, a)) / a;
    }
    auto g = [&](double u) { return k1(u) * k2(u + D); };
    const double alpha = k1.exponent() + (D == 0.0 ? k2.exponent() : 0.0);
    std::vector<double> cuts;
    if (k1.family == KernelFamily::log_fbm) cuts.push_back(log_kink(k1));
    if (k2.family == KernelFamily::log_fbm) cuts.push_back(log_kink(k2) - D);
    // The second factor varies on the scale D near u = 0.
    if (D > 0.0 && k2.exponent() < 0.0) {
        for (double f : {1.0, 8.0, 64.0}) cuts.push_back(lo + f * D);
    }
    const bool log_factor = k1.family == KernelFamily::log_fbm || (D == 0.0 && k2.family == KernelFamily::log_fbm);
    return split_quad(g, alpha, lo, hi, cuts, log_factor);
}

namespace {

Eigen::MatrixXd custom_quad(const KernelSpec& spec, double a, double b,
                            const std::function<Eigen::MatrixXd(double)>& integrand, std::size_t rows,
                            std::size_t cols) {
    Eigen::MatrixXd out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            out(i, j) = gk([&](double r) { return integrand(r)(i, j); }, a, b);
    (void)spec;
    return out;
}

}  // namespace

Eigen::MatrixXd cell_integral(const KernelSpec& spec, double s, double a, double b) {
    require(a <= b && b <= s, "cell_integral requires a <= b <= s");
    if (spec.family == KernelFamily::custom)
        return custom_quad(spec, a, b, [&](double r) { return spec.custom(s, r); }, spec.d, spec.m);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(spec.d, spec.m);
    if (a == b) return out;
    const double lo = s - b, hi = s - a;
    for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = 0; j < spec.m; ++j)
            if (auto k = spec.entry(i, j)) out(i, j) = lag_integral(*k, lo, hi);
    return out;
}

Eigen::MatrixXd covariance_entry(const KernelSpec& spec, double s, double s2, double a, double b) {
    require(a <= b && b <= std::min(s, s2), "covariance_entry requires a <= b <= min(s, s2)");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(spec.d, spec.d);
    if (a == b) return out;
    if (spec.family == KernelFamily::custom)
        return custom_quad(
            spec, a, b,
            [&](double r) -> Eigen::MatrixXd { return spec.custom(s, r) * spec.custom(s2, r).transpose(); },
            spec.d, spec.d);
    const bool first_is_min = s <= s2;
    const double S = first_is_min ? s : s2;
    const double D = first_is_min ? s2 - s : s - s2;
    const double lo = S - b, hi = S - a;
    for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t k = 0; k < spec.d; ++k) {
            if (s == s2 && k < i) {
                out(i, k) = out(k, i);
                continue;
            }
            double acc = 0.0;
            for (std::size_t j = 0; j < spec.m; ++j) {
                auto ki = spec.entry(i, j);
                auto kk = spec.entry(k, j);
                if (!ki || !kk) continue;
                acc += first_is_min ? lag_product_integral(*ki, *kk, lo, hi, D)
                                    : lag_product_integral(*kk, *ki, lo, hi, D);
            }
            out(i, k) = acc;
        }
    return out;
}

Eigen::MatrixXd column_integral(const KernelSpec& spec, double t, double s0, double s1) {
    require(t <= s0 && s0 <= s1, "column_integral requires t <= s0 <= s1");
    if (spec.family == KernelFamily::custom)
        return custom_quad(spec, s0, s1, [&](double s) { return spec.custom(s, t); }, spec.d, spec.m);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(spec.d, spec.m);
    for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = 0; j < spec.m; ++j)
            if (auto k = spec.entry(i, j)) out(i, j) = lag_integral(*k, s0 - t, s1 - t);
    return out;
}

Eigen::MatrixXd column_square_integral(const KernelSpec& spec, double t, double s0, double s1,
                                       std::size_t j) {
    require(t <= s0 && s0 <= s1, "column_square_integral requires t <= s0 <= s1");
    if (spec.family == KernelFamily::custom)
        return custom_quad(
            spec, s0, s1,
            [&](double s) -> Eigen::MatrixXd {
                Eigen::VectorXd col = spec.custom(s, t).col(static_cast<long>(j));
                return col * col.transpose();
            },
            spec.d, spec.d);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(spec.d, spec.d);
    for (std::size_t a = 0; a < spec.d; ++a)
        for (std::size_t b = a; b < spec.d; ++b) {
            auto ka = spec.entry(a, j);
            auto kb = spec.entry(b, j);
            if (!ka || !kb) continue;
            out(a, b) = out(b, a) = lag_product_integral(*ka, *kb, s0 - t, s1 - t, 0.0);
        }
    return out;
}

std::optional<double> singularity_sup(const KernelSpec& spec, double horizon, int samples) {
    if (spec.family == KernelFamily::custom) return std::nullopt;
    std::optional<double> sup;
    const double lo = 1e-6;
    for (std::size_t i = 0; i < spec.d; ++i)
        for (std::size_t j = 0; j < spec.m; ++j) {
            auto k = spec.entry(i, j);
            if (!k) continue;
            if (k->family == KernelFamily::log_fbm && k->H == 0.0) continue;
            const double h = k->exponent() + 0.5;
            for (int n = 0; n < samples; ++n) {
                const double u = lo * std::pow(horizon / lo, static_cast<double>(n) / (samples - 1));
                const double v = std::abs((*k)(u)) * std::pow(u, 0.5 - h);
                sup = sup ? std::max(*sup, v) : v;
            }
        }
    return sup;
}

}  // namespace volpath
