#include "volpath/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "volpath/error.hpp"

namespace volpath {

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) fail(ErrorCode::config, where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) fail(ErrorCode::config, "unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get(const Json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        fail(ErrorCode::config, std::string("wrong type for '") + key + "' in " + where);
    }
}

ScalarKernel scalar_from_json(const Json& j, const std::string& where) {
    check_keys(j, {"family", "c", "beta", "H", "zeta_log", "p_log", "d", "m", "entries"}, where);
    ScalarKernel k;
    k.family = kernel_family_from_string(get<std::string>(j, "family", "power-law", where));
    k.c = get<double>(j, "c", 1.0, where);
    k.beta = get<double>(j, "beta", 0.0, where);
    k.H = get<double>(j, "H", 0.5, where);
    k.zeta_log = get<double>(j, "zeta_log", 1.0, where);
    k.p_log = get<double>(j, "p_log", 2.0, where);
    return k;
}

Json scalar_to_json(const ScalarKernel& k) {
    return Json{{"family", to_string(k.family)}, {"c", k.c}, {"beta", k.beta}, {"H", k.H}, {"zeta_log", k.zeta_log},
                {"p_log", k.p_log}};
}

}  // namespace

KernelSpec kernel_from_json(const Json& j) {
    const std::string where = "kernel";
    check_keys(j, {"family", "c", "beta", "H", "zeta_log", "p_log", "d", "m", "entries"}, where);
    const auto d = get<std::size_t>(j, "d", 1, where);
    const auto m = get<std::size_t>(j, "m", 1, where);
    const std::string fam = get<std::string>(j, "family", "power-law", where);
    if (fam == "custom") fail(ErrorCode::config, "custom kernels are only available through the library API");
    if (fam == "matrix-composite") {
        if (!j.contains("entries") || !j.at("entries").is_array())
            fail(ErrorCode::config, "matrix-composite kernel needs an entries array");
        std::vector<ScalarKernel> entries;
        for (const auto& e : j.at("entries")) entries.push_back(scalar_from_json(e, "kernel entry"));
        return KernelSpec::composite(d, m, std::move(entries));
    }
    return KernelSpec::scalar(scalar_from_json(j, where), d, m);
}

Json to_json(const KernelSpec& spec) {
    Json j;
    if (spec.family == KernelFamily::matrix_composite) {
        j["family"] = "matrix-composite";
        j["entries"] = Json::array();
        for (const auto& e : spec.entries) j["entries"].push_back(scalar_to_json(e));
    } else {
        j = scalar_to_json(spec.base);
    }
    j["d"] = spec.d;
    j["m"] = spec.m;
    return j;
}

VolModel model_from_json(const Json& j) {
    const std::string where = "model";
    check_keys(j, {"family", "zeta", "nu", "lambdas", "alphas", "support", "d"}, where);
    VolModel m;
    m.family = vol_family_from_string(get<std::string>(j, "family", "one-factor-bergomi", where));
    if (m.family == VolFamily::custom) fail(ErrorCode::config, "custom models are only available through the library API");
    if (j.contains("zeta")) {
        const Json& z = j.at("zeta");
        if (z.is_number()) {
            m.zeta = PiecewiseLinear::constant(z.get<double>());
        } else if (z.is_array()) {
            std::vector<std::pair<double, double>> pts;
            for (const auto& p : z) {
                if (!p.is_array() || p.size() != 2) fail(ErrorCode::config, "zeta points must be [tenor, value] pairs");
                pts.emplace_back(p[0].get<double>(), p[1].get<double>());
            }
            m.zeta = PiecewiseLinear(std::move(pts));
        } else {
            fail(ErrorCode::config, "zeta must be a number or a list of [tenor, value] pairs");
        }
    }
    m.nu = get<double>(j, "nu", 1.0, where);
    m.lambdas = get<std::vector<double>>(j, "lambdas", {}, where);
    if (j.contains("alphas")) {
        const auto a = get<std::vector<double>>(j, "alphas", {}, where);
        if (a.size() != 4) fail(ErrorCode::config, "alphas must hold [alpha0, alpha1, alpha3, alpha5]");
        std::copy(a.begin(), a.end(), m.alphas.begin());
    }
    if (j.contains("support")) {
        const auto s = get<std::vector<double>>(j, "support", {}, where);
        if (s.size() != 2) fail(ErrorCode::config, "support must be [start, end]");
        m.support = std::make_pair(s[0], s[1]);
    }
    m.d = get<std::size_t>(j, "d", 1, where);
    return m;
}

Json to_json(const VolModel& model) {
    Json j{{"family", to_string(model.family)}, {"nu", model.nu}, {"d", model.d}};
    if (model.zeta.points().size() == 1) {
        j["zeta"] = model.zeta.points()[0].second;
    } else {
        j["zeta"] = Json::array();
        for (const auto& p : model.zeta.points()) j["zeta"].push_back({p.first, p.second});
    }
    if (!model.lambdas.empty()) j["lambdas"] = model.lambdas;
    j["alphas"] = std::vector<double>(model.alphas.begin(), model.alphas.end());
    if (model.support) j["support"] = {model.support->first, model.support->second};
    return j;
}

Payoff payoff_from_json(const Json& j) {
    const std::string where = "payoff";
    check_keys(j, {"family", "maturity", "strike", "delta_window", "smoothing"}, where);
    Payoff p;
    p.family = payoff_family_from_string(get<std::string>(j, "family", "identity", where));
    if (p.family == PayoffFamily::custom) fail(ErrorCode::config, "custom payoffs are only available through the library API");
    p.maturity = get<double>(j, "maturity", 1.0, where);
    p.strike = get<double>(j, "strike", 0.0, where);
    p.delta_window = get<double>(j, "delta_window", 30.0 / 365.0, where);
    p.smoothing = get<double>(j, "smoothing", 0.0, where);
    p.validate();
    return p;
}

Json to_json(const Payoff& p) {
    return Json{{"family", to_string(p.family)}, {"maturity", p.maturity}, {"strike", p.strike},
                {"delta_window", p.delta_window}, {"smoothing", p.smoothing}};
}

RunConfig run_config_from_json(const Json& j) {
    check_keys(j, {"kernel", "model", "payoff", "grid", "mc", "quadrature", "t", "omega", "direction", "surface",
                   "verify"},
               "config");
    RunConfig c;
    if (j.contains("kernel")) c.kernel = kernel_from_json(j.at("kernel"));
    if (j.contains("model")) c.model = model_from_json(j.at("model"));
    if (j.contains("payoff")) c.payoff = payoff_from_json(j.at("payoff"));
    if (j.contains("grid")) {
        check_keys(j.at("grid"), {"steps_per_year"}, "grid");
        c.pricing.steps_per_year = get<int>(j.at("grid"), "steps_per_year", 500, "grid");
        if (c.pricing.steps_per_year < 1) fail(ErrorCode::config, "steps_per_year must be positive");
    }
    if (j.contains("mc")) {
        const Json& mc = j.at("mc");
        check_keys(mc, {"M", "seed", "antithetic", "workers", "batch_size", "pathwise"}, "mc");
        c.pricing.M = get<std::size_t>(mc, "M", c.pricing.M, "mc");
        c.pricing.seed = get<std::uint64_t>(mc, "seed", c.pricing.seed, "mc");
        c.pricing.antithetic = get<bool>(mc, "antithetic", false, "mc");
        c.pricing.workers = get<int>(mc, "workers", 1, "mc");
        c.pricing.batch_size = get<std::uint64_t>(mc, "batch_size", 1024, "mc");
        c.pricing.pathwise = get<bool>(mc, "pathwise", false, "mc");
        if (c.pricing.M < 2) fail(ErrorCode::config, "mc.M must be at least 2");
        if (c.pricing.workers < 1) fail(ErrorCode::config, "mc.workers must be at least 1");
        if (c.pricing.batch_size < 1) fail(ErrorCode::config, "mc.batch_size must be positive");
    }
    if (j.contains("quadrature")) {
        check_keys(j.at("quadrature"), {"gh_order", "inner_mc"}, "quadrature");
        c.pricing.quad.gh_order = get<int>(j.at("quadrature"), "gh_order", 32, "quadrature");
        c.pricing.quad.inner_mc = get<int>(j.at("quadrature"), "inner_mc", 4096, "quadrature");
    }
    c.t = get<double>(j, "t", 0.0, "config");
    if (j.contains("omega")) {
        const Json& o = j.at("omega");
        check_keys(o, {"kind", "value", "path"}, "omega");
        const std::string kind = get<std::string>(o, "kind", "zero", "omega");
        if (kind == "zero") {
            c.omega.kind = OmegaSource::Kind::zero;
        } else if (kind == "constant") {
            c.omega.kind = OmegaSource::Kind::constant;
            c.omega.value = get<double>(o, "value", 0.0, "omega");
        } else if (kind == "csv" || kind == "forward-variance") {
            c.omega.kind = kind == "csv" ? OmegaSource::Kind::csv : OmegaSource::Kind::forward_variance;
            c.omega.path = get<std::string>(o, "path", "", "omega");
            std::ifstream probe(c.omega.path);
            if (!probe) fail(ErrorCode::config, "omega file '" + c.omega.path + "' does not exist");
        } else {
            fail(ErrorCode::config, "unknown omega kind '" + kind + "'");
        }
    }
    if (j.contains("direction")) {
        const Json& d = j.at("direction");
        check_keys(d, {"kind", "delta", "column", "value"}, "direction");
        const std::string kind = get<std::string>(d, "kind", "truncated", "direction");
        const auto col = get<std::size_t>(d, "column", 0, "direction");
        if (kind == "truncated")
            c.direction = Direction::truncated(get<double>(d, "delta", 0.05, "direction"), col);
        else if (kind == "singular")
            c.direction = Direction::singular(col);
        else if (kind == "explicit") {
            c.direction = Direction{};
            c.direction_value = get<double>(d, "value", 1.0, "direction");
        } else
            fail(ErrorCode::config, "unknown direction kind '" + kind + "'");
    }
    if (j.contains("surface")) {
        check_keys(j.at("surface"), {"strikes", "maturities"}, "surface");
        c.strikes = get<std::vector<double>>(j.at("surface"), "strikes", {}, "surface");
        c.maturities = get<std::vector<double>>(j.at("surface"), "maturities", {}, "surface");
    }
    if (j.contains("verify")) {
        const Json& v = j.at("verify");
        check_keys(v, {"eps_t", "delta", "time_order", "times", "M_outer", "M_inner", "eps_ladder", "tol",
                       "max_relative"},
                   "verify");
        auto& o = c.verify;
        o.eps_t = get<double>(v, "eps_t", o.eps_t, "verify");
        o.delta = get<double>(v, "delta", o.delta, "verify");
        o.time_order = get<int>(v, "time_order", o.time_order, "verify");
        o.times = get<std::vector<double>>(v, "times", o.times, "verify");
        o.M_outer = get<std::size_t>(v, "M_outer", o.M_outer, "verify");
        o.M_inner = get<std::size_t>(v, "M_inner", o.M_inner, "verify");
        o.eps_ladder = get<std::vector<double>>(v, "eps_ladder", o.eps_ladder, "verify");
        o.tol = get<double>(v, "tol", o.tol, "verify");
        o.max_relative = get<double>(v, "max_relative", o.max_relative, "verify");
    }
    return c;
}

RunConfig read_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::config, "cannot open config file " + path);
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::config, std::string("config is not valid JSON: ") + e.what());
    }
    return run_config_from_json(j);
}

PathSample load_omega(const RunConfig& cfg, GridPtr grid) {
    const std::size_t d = cfg.kernel.d;
    switch (cfg.omega.kind) {
        case OmegaSource::Kind::zero: return PathSample(grid, d, 0.0);
        case OmegaSource::Kind::constant: return PathSample(grid, d, cfg.omega.value);
        case OmegaSource::Kind::forward_variance: {
            const ForwardVarianceCurve curve = read_curve_csv(cfg.omega.path, cfg.t);
            return theta_from_xi(curve, cfg.model, cfg.kernel, grid);
        }
        case OmegaSource::Kind::csv: break;
    }
    std::ifstream in(cfg.omega.path);
    if (!in) fail(ErrorCode::config, "cannot open omega file " + cfg.omega.path);
    std::string line;
    std::getline(in, line);
    std::vector<double> times;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double s = 0.0;
        if (!(ss >> s)) fail(ErrorCode::config, "malformed omega row");
        std::vector<double> x(d);
        for (auto& v : x)
            if (!(ss >> v)) fail(ErrorCode::config, "omega row has fewer than d components");
        if (!times.empty() && s <= times.back()) fail(ErrorCode::config, "omega times must be ascending");
        times.push_back(s);
        rows.push_back(x);
    }
    if (times.empty()) fail(ErrorCode::config, "omega file has no rows");
    PathSample out(grid, d);
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double s = (*grid)[i];
        const auto it = std::upper_bound(times.begin(), times.end(), s);
        const std::size_t hi = static_cast<std::size_t>(it - times.begin());
        for (std::size_t k = 0; k < d; ++k) {
            if (hi == 0)
                out(i, k) = rows.front()[k];
            else if (hi == times.size())
                out(i, k) = rows.back()[k];
            else {
                const double w = (s - times[hi - 1]) / (times[hi] - times[hi - 1]);
                out(i, k) = (1.0 - w) * rows[hi - 1][k] + w * rows[hi][k];
            }
        }
    }
    return out;
}

Json to_json(const PriceEstimate& e, bool timing) {
    Json j{{"mean", e.mean},
           {"std_error", e.std_error},
           {"ci95", {e.ci95.first, e.ci95.second}},
           {"M", e.M},
           {"seed", e.seed},
           {"diagnostics", {{"floor_hits", e.diag.floor_hits}, {"overflow_events", e.diag.overflow_events}}}};
    if (timing) j["runtime_ms"] = e.runtime_ms;
    return j;
}

Json to_json(const PPDEReport& r) {
    const auto& e = r.est;
    return Json{{"price", to_json(e.price, false)},
                {"time_derivative", to_json(e.time_derivative, false)},
                {"second_truncated", to_json(e.second_truncated, false)},
                {"second_singular", to_json(e.second_singular, false)},
                {"residual", to_json(e.residual, false)},
                {"residual_singular", to_json(e.residual_singular, false)},
                {"relative", r.relative},
                {"ci_contains_zero", r.ci_contains_zero},
                {"singular_ci_contains_zero", r.singular_ci_contains_zero}};
}

Json to_json(const MartingaleReport& r) {
    Json rows = Json::array();
    for (const auto& x : r.rows)
        rows.push_back({{"s", x.s},
                        {"outer_mean", x.outer_mean},
                        {"outer_se", x.outer_se},
                        {"reference", x.reference},
                        {"reference_se", x.reference_se},
                        {"difference", x.difference},
                        {"combined_se", x.combined_se},
                        {"pass", x.pass}});
    return Json{{"rows", rows}, {"M_outer", r.M_outer}, {"M_inner", r.M_inner}, {"pass", r.pass}};
}

Json to_json(const TimeInvarianceReport& r) {
    return Json{{"original", r.original}, {"shifted", r.shifted}, {"difference", r.difference}, {"bitwise", r.bitwise}};
}

Json to_json(const FDReport& r) {
    Json rows = Json::array();
    for (const auto& x : r.rows)
        rows.push_back({{"eps", x.eps},
                        {"forward", x.forward},
                        {"central", x.central},
                        {"second", x.second},
                        {"rel_first", x.rel_first},
                        {"rel_second", x.rel_second}});
    return Json{{"first", to_json(r.first, false)},
                {"second", to_json(r.second, false)},
                {"rows", rows},
                {"forward_slope", r.forward_slope},
                {"pass", r.pass}};
}

Json to_json(const IVState& s) {
    return Json{{"t", s.t},
                {"tau", s.tau},
                {"kappa", s.kappa},
                {"future", s.future},
                {"price", s.price},
                {"psi", s.psi},
                {"sigma_hat", s.sigma_hat},
                {"d_omega_psi", s.d_omega_psi},
                {"d_omega_sigma_hat", s.d_omega_sigma_hat},
                {"d2_omega_sigma_hat", s.d2_omega_sigma_hat},
                {"dt_sigma_hat", s.dt_sigma_hat},
                {"residual_se", s.residual_se}};
}

}  // namespace volpath
