#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace volpath {

enum class KernelFamily { exponential, power_law, gamma, fbm_shifted, log_fbm, matrix_composite, custom };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

// One scalar kernel k(u) of the lag u = s - r >= 0.
struct ScalarKernel {
    KernelFamily family = KernelFamily::power_law;
    double c = 1.0;
    double beta = 0.0;
    double H = 0.5;
    double zeta_log = 1.0;
    double p_log = 2.0;

    // Exponent a of the u^a behaviour at the diagonal (0 for exponential).
    double exponent() const;
    bool vanishes() const { return c == 0.0; }
    bool finite_at_zero() const;
    double operator()(double u) const;
    void validate() const;
};

class KernelSpec {
public:
    using CustomFn = std::function<Eigen::MatrixXd(double s, double t)>;

    KernelFamily family = KernelFamily::power_law;
    ScalarKernel base;
    std::size_t d = 1;
    std::size_t m = 1;
    std::vector<ScalarKernel> entries;  // d*m, row-major, matrix-composite only
    CustomFn custom;                    // custom only, not serialisable

    static KernelSpec scalar(const ScalarKernel& k, std::size_t d = 1, std::size_t m = 1);
    static KernelSpec exponential(double c, double beta);
    static KernelSpec power_law(double c, double H);
    static KernelSpec gamma(double c, double beta, double H);
    static KernelSpec log_fbm(double c, double H, double zeta_log, double p_log);
    static KernelSpec zero(std::size_t d = 1, std::size_t m = 1);
    static KernelSpec composite(std::size_t d, std::size_t m, std::vector<ScalarKernel> entries);
    // Arbitrary K(s,t); integrals fall back to adaptive quadrature in r.
    static KernelSpec from_function(std::size_t d, std::size_t m, CustomFn fn);

    // Entry (i,j) as a scalar kernel of the lag; nullopt for structural zeros.
    std::optional<ScalarKernel> entry(std::size_t i, std::size_t j) const;
    bool is_convolution() const { return family != KernelFamily::custom; }
    bool is_zero() const;
    // Smallest exponent over active entries; negative means singular diagonal.
    double min_exponent() const;
    void validate() const;
};

Eigen::MatrixXd eval(const KernelSpec& spec, double s, double t);
Eigen::MatrixXd eval_truncated(const KernelSpec& spec, double delta, double s, double t);

// int_a^b K(s,r) dr.
Eigen::MatrixXd cell_integral(const KernelSpec& spec, double s, double a, double b);

// int_a^b K(s,r) K(s2,r)^T dr.
Eigen::MatrixXd covariance_entry(const KernelSpec& spec, double s, double s2, double a, double b);

// int_{s0}^{s1} K(s,t) ds, the column integral used next to a singular diagonal.
Eigen::MatrixXd column_integral(const KernelSpec& spec, double t, double s0, double s1);

// int_{s0}^{s1} K(s,t)_{.j} K(s,t)_{.j}^T ds for Brownian column j.
Eigen::MatrixXd column_square_integral(const KernelSpec& spec, double t, double s0, double s1,
                                       std::size_t j);

// Scalar building blocks on lags.
double lag_integral(const ScalarKernel& k, double lo, double hi);
// int_lo^hi k1(u) k2(u + D) du with D >= 0.
double lag_product_integral(const ScalarKernel& k1, const ScalarKernel& k2, double lo, double hi,
                            double D);

// Empirical sup of |K(s,t)| (s-t)^{1/2-H} over lags in [1e-6, horizon]; nullopt
// when no entry qualifies (H = 0 log-fbm is excluded).
std::optional<double> singularity_sup(const KernelSpec& spec, double horizon, int samples = 200);

}  // namespace volpath
