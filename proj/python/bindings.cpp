#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <tuple>

#include "volpath/cli.hpp"
#include "volpath/error.hpp"
#include "volpath/io.hpp"

namespace py = pybind11;
using namespace volpath;

namespace {

std::string price_json(const std::string& config) {
    const RunConfig c = run_config_from_json(Json::parse(config));
    const GridPtr grid = pricing_grid(c.t, c.payoff, c.model, c.pricing.steps_per_year);
    const PathSample omega = load_omega(c, grid);
    return to_json(price(c.t, omega, c.payoff, c.model, c.kernel, c.pricing), false).dump();
}

py::array_t<double> simulate_paths(const std::string& kernel, double t, double T, double horizon, int steps,
                                   std::size_t M, std::uint64_t seed, int workers) {
    const KernelSpec spec = kernel_from_json(Json::parse(kernel));
    const GridPtr grid = make_grid(horizon, steps, {t, T});
    const GaussianBatch b = simulate(spec, grid, t, T, M, seed, workers);
    py::array_t<double> out({b.M, b.n_nodes, b.d});
    std::copy(b.J_paths.begin(), b.J_paths.end(), out.mutable_data());
    return out;
}

// Runs without the GIL, so return plain C++ values and let pybind11 convert them.
std::tuple<int, std::string, std::string> cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

PYBIND11_MODULE(_volpath, m) {
    m.doc() = "Gaussian Volterra volatility pricing core";
    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> exc_storage;
    exc_storage.call_once_and_store_result(
        [&]() { return py::exception<Error>(m, "VolpathError", PyExc_RuntimeError); });
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const std::string msg = std::string(to_string(e.code())) + ": " + e.what();
            py::set_error(exc_storage.get_stored(), msg.c_str());
        }
    });

    m.def("price_json", &price_json, py::arg("config"), py::call_guard<py::gil_scoped_release>());
    m.def("simulate_json", &simulate_paths, py::arg("kernel"), py::arg("t"), py::arg("T"), py::arg("horizon"),
          py::arg("steps_per_year"), py::arg("M"), py::arg("seed"), py::arg("workers") = 1);
    m.def("run_cli", &cli, py::arg("args"), py::call_guard<py::gil_scoped_release>());
    m.def("bs_price", py::overload_cast<double, double, double, double>(&bs_price), py::arg("S"), py::arg("kappa"),
          py::arg("sigma"), py::arg("tau"));
    m.def("implied_vol", &implied_vol, py::arg("price"), py::arg("S"), py::arg("kappa"), py::arg("tau"));
    m.def(
        "reduced_v",
        [](double tau, double x) {
            const ReducedV r = reduced_v(tau, x);
            return py::dict(py::arg("v") = r.v, py::arg("v_tau") = r.v_tau, py::arg("v_x") = r.v_x,
                            py::arg("v_tau_x") = r.v_tau_x, py::arg("v_tau_tau") = r.v_tau_tau, py::arg("v_xx") = r.v_xx);
        },
        py::arg("tau"), py::arg("x"));
    m.def(
        "theta_from_xi",
        [](std::vector<double> tenors, std::vector<double> xi, double asof, double nu, double H, std::vector<double> times) {
            ForwardVarianceCurve c{asof, std::move(tenors), std::move(xi)};
            const GridPtr grid = std::make_shared<const TimeGrid>(std::move(times));
            return theta_from_xi(c, nu, H, grid).values;
        },
        py::arg("tenors"), py::arg("xi"), py::arg("asof"), py::arg("nu"), py::arg("H"), py::arg("times"));
    m.def(
        "xi_from_theta",
        [](std::vector<double> times, std::vector<double> theta, double nu, double H, double t) {
            PathSample p;
            p.grid = std::make_shared<const TimeGrid>(std::move(times));
            p.d = 1;
            p.values = std::move(theta);
            const ForwardVarianceCurve c = xi_from_theta(p, nu, H, t);
            return py::make_tuple(c.tenors, c.values);
        },
        py::arg("times"), py::arg("theta"), py::arg("nu"), py::arg("H"), py::arg("t"));
}
