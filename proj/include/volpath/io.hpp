#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "volpath/greeks.hpp"
#include "volpath/impliedvol.hpp"
#include "volpath/marketdata.hpp"
#include "volpath/verifier.hpp"

namespace volpath {

using Json = nlohmann::json;

KernelSpec kernel_from_json(const Json& j);
Json to_json(const KernelSpec& spec);
VolModel model_from_json(const Json& j);
Json to_json(const VolModel& model);
Payoff payoff_from_json(const Json& j);
Json to_json(const Payoff& payoff);

// How the state path omega is supplied.
struct OmegaSource {
    enum class Kind { zero, constant, csv, forward_variance };
    Kind kind = Kind::zero;
    double value = 0.0;
    std::string path;
};

struct VerifyOptions {
    double eps_t = 1e-3;
    double delta = 0.02;
    int time_order = 1;
    std::vector<double> times;  // martingale check, defaults to T/4, T/2
    std::size_t M_outer = 1000;
    std::size_t M_inner = 1000;
    std::vector<double> eps_ladder{1e-1, 1e-2, 1e-3, 1e-4};
    double tol = 0.02;
    double max_relative = 0.01;
};

struct RunConfig {
    KernelSpec kernel = KernelSpec::power_law(1.0, 0.1);
    VolModel model;
    Payoff payoff;
    PricingConfig pricing;
    double t = 0.0;
    OmegaSource omega;
    std::optional<Direction> direction;  // explicit directions are constant paths
    double direction_value = 1.0;
    std::vector<double> strikes, maturities;
    VerifyOptions verify;
};

// Validates the schema; unknown keys and wrong types raise config errors.
RunConfig run_config_from_json(const Json& j);
RunConfig read_run_config(const std::string& path);

// omega on the given grid; csv files carry "time,x0[,x1...]" rows interpolated linearly.
PathSample load_omega(const RunConfig& cfg, GridPtr grid);

Json to_json(const PriceEstimate& e, bool timing = true);
Json to_json(const PPDEReport& r);
Json to_json(const MartingaleReport& r);
Json to_json(const TimeInvarianceReport& r);
Json to_json(const FDReport& r);
Json to_json(const IVState& s);

}  // namespace volpath
