#include "volpath/marketdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "volpath/error.hpp"

namespace volpath {

void ForwardVarianceCurve::validate() const {
    require(!tenors.empty() && tenors.size() == values.size(), "forward variance curve needs matching tenors and values",
            ErrorCode::config);
    for (std::size_t i = 0; i < tenors.size(); ++i) {
        if (!(values[i] > 0.0)) fail(ErrorCode::nonpositive_xi, "forward variance must be positive");
        require(tenors[i] >= asof, "forward variance tenors must not precede the as-of time", ErrorCode::config);
        if (i > 0) require(tenors[i] > tenors[i - 1], "forward variance tenors must be ascending", ErrorCode::config);
    }
}

double ForwardVarianceCurve::operator()(double s) const {
    if (s <= tenors.front()) return values.front();
    if (s >= tenors.back()) return values.back();
    const auto it = std::upper_bound(tenors.begin(), tenors.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - tenors.begin());
    const double w = (s - tenors[i - 1]) / (tenors[i] - tenors[i - 1]);
    return std::exp((1.0 - w) * std::log(values[i - 1]) + w * std::log(values[i]));
}

namespace {

double correction(double s, double t, double H) {
    return std::pow(s, 2.0 * H) - std::pow(s - t, 2.0 * H);
}

}  // namespace

PathSample theta_from_xi(const ForwardVarianceCurve& curve, double nu, double H, GridPtr grid) {
    curve.validate();
    require(nu != 0.0, "nu must be non-zero");
    require(H > 0.0 && H < 1.0, "H must lie in (0, 1)");
    PathSample out(grid, 1, 0.0);
    const double t = curve.asof;
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double s = (*grid)[i];
        if (s < t) continue;
        out(i, 0) = std::log(curve(s)) / nu + nu / (4.0 * H) * correction(s, t, H);
    }
    return out;
}

PathSample theta_from_xi(const ForwardVarianceCurve& curve, const VolModel& model, const KernelSpec& spec,
                         GridPtr grid) {
    const bool ok = model.family == VolFamily::one_factor_bergomi && spec.family == KernelFamily::power_law &&
                    spec.d == 1 && spec.m == 1 && spec.base.c == 1.0 && model.zeta.is_constant(1.0) &&
                    model.time_offset == 0.0;
    if (!ok)
        fail(ErrorCode::unsupported_model,
             "forward variance inversion needs one-factor rough Bergomi with a unit power-law kernel and zeta = 1");
    return theta_from_xi(curve, model.nu, spec.base.H, std::move(grid));
}

ForwardVarianceCurve xi_from_theta(const PathSample& theta, double nu, double H, double t) {
    require(theta.d == 1, "xi_from_theta needs a scalar path");
    require(H > 0.0 && H < 1.0, "H must lie in (0, 1)");
    ForwardVarianceCurve c;
    c.asof = t;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double s = (*theta.grid)[i];
        if (s < t) continue;
        c.tenors.push_back(s);
        c.values.push_back(std::exp(nu * theta(i, 0) - nu * nu / (4.0 * H) * correction(s, t, H)));
    }
    return c;
}

ForwardVarianceCurve read_curve_csv(const std::string& path, double asof) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::config, "cannot open forward variance file " + path);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::config, "empty forward variance file " + path);
    line.erase(std::remove_if(line.begin(), line.end(), [](char ch) { return ch == ' ' || ch == '\r'; }), line.end());
    if (line != "tenor,xi") fail(ErrorCode::config, "forward variance file must start with the header tenor,xi");
    ForwardVarianceCurve c;
    c.asof = asof;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double tenor = 0.0, xi = 0.0;
        if (!(ss >> tenor >> xi)) fail(ErrorCode::config, "malformed forward variance row " + std::to_string(row));
        c.tenors.push_back(tenor);
        c.values.push_back(xi);
    }
    c.validate();
    return c;
}

void write_curve_csv(const ForwardVarianceCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::config, "cannot write " + path);
    out.precision(17);
    out << "tenor,xi\n";
    for (std::size_t i = 0; i < curve.tenors.size(); ++i) out << curve.tenors[i] << ',' << curve.values[i] << '\n';
}

}  // namespace volpath
