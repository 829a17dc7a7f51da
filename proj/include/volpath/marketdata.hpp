#pragma once

#include <string>
#include <vector>

#include "volpath/grid.hpp"
#include "volpath/volmodel.hpp"

namespace volpath {

struct ForwardVarianceCurve {
    double asof = 0.0;
    std::vector<double> tenors;  // ascending, >= asof
    std::vector<double> values;  // xi^t_s > 0

    void validate() const;
    // Log-linear interpolation, flat outside the tenors.
    double operator()(double s) const;
};

// Theta^t_s = log(xi_s) / nu + nu / (4H) (s^{2H} - (s - t)^{2H}) at the grid
// nodes s >= asof; earlier nodes are left at zero.
PathSample theta_from_xi(const ForwardVarianceCurve& curve, double nu, double H, GridPtr grid);

// Same, with nu and H read from a one-factor rough Bergomi model (power-law
// kernel with c = 1, zeta = 1); other models raise unsupported_model.
PathSample theta_from_xi(const ForwardVarianceCurve& curve, const VolModel& model, const KernelSpec& spec,
                         GridPtr grid);

// xi^t_s = exp(nu Theta_s - nu^2 / (4H) (s^{2H} - (s - t)^{2H})) on the nodes s >= t.
ForwardVarianceCurve xi_from_theta(const PathSample& theta, double nu, double H, double t);

// CSV with header "tenor,xi".
ForwardVarianceCurve read_curve_csv(const std::string& path, double asof);
void write_curve_csv(const ForwardVarianceCurve& curve, const std::string& path);

}  // namespace volpath
