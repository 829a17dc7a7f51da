#include "volpath/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "volpath/error.hpp"
#include "volpath/io.hpp"

namespace volpath {

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    bool no_timing = false;
    std::string dump_batch;
    std::string check;
    // ingest-curve
    std::string csv;
    double asof = 0.0;
    double nu = 1.0;
    double H = 0.1;
    double horizon = 0.0;
    int steps = 500;
};

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::config:
        case ErrorCode::invalid_argument:
        case ErrorCode::domain:
        case ErrorCode::grid_mismatch:
        case ErrorCode::unsupported_model:
        case ErrorCode::not_convolution:
        case ErrorCode::nonpositive_xi:
        case ErrorCode::out_of_band: return 2;
        default: return 1;
    }
}

void emit_error(std::ostream& err, const std::string& code, const std::string& message) {
    err << Json{{"error", code}, {"message", message}}.dump() << '\n';
}

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) fail(ErrorCode::config, "cannot write output file " + path);
            stream_ = file_.get();
        }
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

RunConfig load(const Options& o) {
    if (o.config.empty()) fail(ErrorCode::config, "--config is required");
    RunConfig c = read_run_config(o.config);
    if (o.seed) c.pricing.seed = *o.seed;
    if (o.workers) {
        require(*o.workers >= 1, "--workers must be at least 1", ErrorCode::config);
        c.pricing.workers = *o.workers;
    }
    return c;
}

Json fixture(const RunConfig& c) {
    return Json{{"kernel", to_json(c.kernel)}, {"model", to_json(c.model)}, {"payoff", to_json(c.payoff)},
                {"t", c.t},          {"M", c.pricing.M},            {"seed", c.pricing.seed}};
}

PathSample explicit_eta(const RunConfig& c, GridPtr grid) {
    return PathSample::from_function(grid, c.kernel.d, [&](double s, std::size_t) { return s >= c.t ? c.direction_value : 0.0; });
}

void dump_batch(const RunConfig& c, GridPtr grid, const std::string& path) {
    const GaussianBatch b = simulate(c.kernel, grid, c.t, c.payoff.maturity, c.pricing.M, c.pricing.seed, c.pricing.workers);
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::config, "cannot write batch file " + path);
    const std::uint64_t header[3] = {b.M, b.n_nodes, b.d};
    // The host is little-endian on every supported platform; values are written as is.
    f.write(reinterpret_cast<const char*>(header), sizeof header);
    f.write(reinterpret_cast<const char*>(b.J_paths.data()), static_cast<std::streamsize>(b.J_paths.size() * sizeof(double)));
}

int cmd_price(const Options& o, std::ostream& out) {
    const RunConfig c = load(o);
    const GridPtr grid = pricing_grid(c.t, c.payoff, c.model, c.pricing.steps_per_year);
    const PathSample omega = load_omega(c, grid);
    const PriceEstimate e = price(c.t, omega, c.payoff, c.model, c.kernel, c.pricing);
    if (!o.dump_batch.empty()) dump_batch(c, grid, o.dump_batch);
    Output w(o.out, out);
    *w << to_json(e, !o.no_timing).dump(2) << '\n';
    return 0;
}

int cmd_greeks(const Options& o, std::ostream& out) {
    const RunConfig c = load(o);
    if (!c.direction) fail(ErrorCode::config, "greeks needs a direction in the config");
    const GridPtr grid = pricing_grid(c.t, c.payoff, c.model, c.pricing.steps_per_year);
    const PathSample omega = load_omega(c, grid);
    const PricingProblem pb(c.t, grid, c.payoff, c.model, c.kernel, c.pricing);
    Direction dir = *c.direction;
    if (dir.kind == Direction::Kind::explicit_path) dir.path = explicit_eta(c, grid);
    DerivativeRequest req;
    DerivativeRequest::Second sec;
    Json j{{"fixture", fixture(c)}};
    if (dir.kind == Direction::Kind::singular_kernel) {
        for (std::size_t col = 0; col < c.kernel.m; ++col) {
            const Direction dc = Direction::singular(col);
            req.firsts.push_back(first_coefficients(pb, dc));
            sec.a.push_back(col);
            sec.b.push_back(col);
            sec.hess_coefs.push_back(second_coefficients(pb, dc, dc));
        }
        req.firsts_reported = c.kernel.m;
        j["direction"] = {{"kind", "singular"}};
    } else {
        req.firsts.push_back(first_coefficients(pb, dir));
        sec.a = {0};
        sec.b = {0};
        sec.hess_coefs = {second_coefficients(pb, dir, dir)};
        req.firsts_reported = 1;
        if (dir.kind == Direction::Kind::truncated_kernel)
            j["direction"] = {{"kind", "truncated"}, {"delta", dir.delta}, {"column", dir.column}};
        else
            j["direction"] = {{"kind", "explicit"}, {"value", c.direction_value}};
    }
    req.seconds = {sec};
    const DerivativeResult r = derivatives(pb, omega, req);
    j["price"] = to_json(r.price, false);
    Json firsts = Json::array();
    std::vector<double> hedge;
    for (const auto& e : r.firsts) {
        firsts.push_back(to_json(e, false));
        hedge.push_back(e.mean);
    }
    j["first"] = firsts;
    j["second"] = to_json(r.seconds[0], false);
    if (dir.kind == Direction::Kind::singular_kernel) j["hedge_ratio"] = hedge;
    Output w(o.out, out);
    *w << j.dump(2) << '\n';
    return 0;
}

Payoff future_of(const Payoff& p) {
    Payoff f = p;
    f.strike = 0.0;
    f.smoothing = 0.0;
    if (p.is_vix())
        f.family = PayoffFamily::vix_future;
    else if (p.is_rv())
        f.family = PayoffFamily::rv_swap;
    else
        fail(ErrorCode::config, "surfaces need a VIX or realised-variance call payoff");
    return f;
}

int cmd_surface(const Options& o, std::ostream& out, bool implied) {
    const RunConfig c = load(o);
    if (c.strikes.empty() || c.maturities.empty()) fail(ErrorCode::config, "surface needs strikes and maturities");
    Output w(o.out, out);
    *w << (implied ? "strike,maturity,future,price,iv,sigma_hat\n" : "strike,maturity,price,std_error,iv\n");
    for (double T : c.maturities) {
        Payoff p = c.payoff;
        p.maturity = T;
        const Payoff fut = future_of(p);
        const GridPtr grid = pricing_grid(c.t, p, c.model, c.pricing.steps_per_year);
        const PathSample omega = load_omega(c, grid);
        const PricingProblem base(c.t, grid, p, c.model, c.kernel, c.pricing);
        PricingProblem fpb = base;
        fpb.payoff = fut;
        const double F = price(fpb, omega).mean;
        for (double K : c.strikes) {
            PricingProblem pb = base;
            pb.payoff = p.with_strike(K);
            const PriceEstimate e = price(pb, omega);
            double iv = std::nan("");
            try {
                iv = implied_vol(e.mean, F, K, T - c.t);
            } catch (const Error&) {
            }
            if (implied)
                *w << fmt(K) << ',' << fmt(T) << ',' << fmt(F) << ',' << fmt(e.mean) << ',' << fmt(iv) << ','
                   << fmt((T - c.t) * iv * iv) << '\n';
            else
                *w << fmt(K) << ',' << fmt(T) << ',' << fmt(e.mean) << ',' << fmt(e.std_error) << ',' << fmt(iv) << '\n';
        }
    }
    return 0;
}

int cmd_verify(const Options& o, std::ostream& out) {
    const RunConfig c = load(o);
    const auto& v = c.verify;
    Json j{{"check", o.check}, {"fixtures", fixture(c)}};
    bool pass = false;
    if (o.check == "ppde") {
        const GridPtr grid = verification_grid(c.t, v.eps_t, c.payoff, c.model, c.pricing.steps_per_year, {}, v.time_order);
        const PPDEReport r = ppde_residual(c.t, load_omega(c, grid), c.payoff, c.model, c.kernel, v.eps_t, v.delta,
                                           c.pricing, v.time_order);
        pass = r.relative <= v.max_relative && r.ci_contains_zero;
        j["numbers"] = to_json(r);
        j["numbers"]["eps_t"] = v.eps_t;
        j["numbers"]["delta"] = v.delta;
    } else if (o.check == "martingale") {
        std::vector<double> times = v.times;
        if (times.empty()) times = {0.25 * c.payoff.maturity, 0.5 * c.payoff.maturity};
        const GridPtr grid = pricing_grid(0.0, c.payoff, c.model, c.pricing.steps_per_year, times);
        RunConfig c0 = c;
        c0.t = 0.0;
        const MartingaleReport r =
            martingale_check(times, load_omega(c0, grid), c.payoff, c.model, c.kernel, v.M_outer, v.M_inner, c.pricing);
        pass = r.pass;
        j["numbers"] = to_json(r);
    } else if (o.check == "time-invariance") {
        const GridPtr grid = pricing_grid(c.t, c.payoff, c.model, c.pricing.steps_per_year);
        const TimeInvarianceReport r = time_invariance_check(c.t, load_omega(c, grid), c.payoff, c.model, c.kernel, c.pricing);
        pass = r.bitwise;
        j["numbers"] = to_json(r);
    } else if (o.check == "fd") {
        if (!c.direction) fail(ErrorCode::config, "verify fd needs a direction in the config");
        const GridPtr grid = pricing_grid(c.t, c.payoff, c.model, c.pricing.steps_per_year);
        Direction dir = *c.direction;
        if (dir.kind == Direction::Kind::explicit_path) dir.path = explicit_eta(c, grid);
        if (dir.kind == Direction::Kind::singular_kernel)
            fail(ErrorCode::config, "finite differences need a continuous direction");
        const FDReport r = fd_derivative_check(c.t, load_omega(c, grid), dir, c.payoff, c.model, c.kernel, c.pricing,
                                               v.eps_ladder, v.tol);
        pass = r.pass;
        j["numbers"] = to_json(r);
    } else if (o.check == "iv-ppde") {
        const GridPtr grid = verification_grid(c.t, v.eps_t, c.payoff, c.model, c.pricing.steps_per_year, {}, 2);
        const IVState s = iv_state(c.t, load_omega(c, grid), c.payoff, c.model, c.kernel, c.pricing, v.eps_t, v.delta, 2);
        const double res = iv_ppde_residual(s);
        const double res_tau = iv_ppde_residual_tau(s);
        const double band = 1.96 * s.residual_se;
        pass = std::abs(res) <= band;
        j["numbers"] = {{"state", to_json(s)}, {"residual", res}, {"residual_tau_form", res_tau}, {"band95", band}};
    } else {
        fail(ErrorCode::config, "unknown check '" + o.check + "'");
    }
    j["pass"] = pass;
    Output w(o.out, out);
    *w << j.dump(2) << '\n';
    return pass ? 0 : 1;
}

int cmd_ingest(const Options& o, std::ostream& out) {
    if (o.csv.empty()) fail(ErrorCode::config, "ingest-curve needs --csv");
    const ForwardVarianceCurve curve = read_curve_csv(o.csv, o.asof);
    const double horizon = o.horizon > 0.0 ? o.horizon : curve.tenors.back();
    require(o.steps >= 1, "--steps must be positive", ErrorCode::config);
    const GridPtr grid = make_grid(horizon, o.steps, {o.asof});
    const PathSample theta = theta_from_xi(curve, o.nu, o.H, grid);
    Output w(o.out, out);
    *w << "time,theta\n";
    for (std::size_t i = grid->lower_index(o.asof); i < grid->size(); ++i)
        *w << fmt((*grid)[i]) << ',' << fmt(theta(i, 0)) << '\n';
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Monte Carlo pricing, greeks and verification for Gaussian Volterra volatility models", "volpath"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "run configuration (JSON)");
        sub->add_option("--seed", o.seed, "override mc.seed");
        sub->add_option("--workers", o.workers, "override mc.workers");
        sub->add_option("--out", o.out, "output file (default stdout)");
        sub->add_flag("--no-timing", o.no_timing, "omit wall-clock fields so outputs compare bitwise");
    };
    auto* price_cmd = app.add_subcommand("price", "price the configured payoff");
    common(price_cmd);
    price_cmd->add_option("--dump-batch", o.dump_batch, "write the Gaussian increment batch (LE uint64 M,N,d then float64)");
    auto* greeks_cmd = app.add_subcommand("greeks", "pathwise derivatives along the configured direction");
    common(greeks_cmd);
    auto* surface_cmd = app.add_subcommand("surface", "price and implied-volatility surface CSV");
    common(surface_cmd);
    auto* iv_cmd = app.add_subcommand("impliedvol", "implied volatility and total implied variance CSV");
    common(iv_cmd);
    auto* verify_cmd = app.add_subcommand("verify", "numerical checks of the pricing PPDE and its corollaries");
    common(verify_cmd);
    verify_cmd->add_option("check", o.check, "ppde | martingale | time-invariance | fd | iv-ppde")->required();
    auto* ingest_cmd = app.add_subcommand("ingest-curve", "forward variance CSV to the state path Theta");
    ingest_cmd->add_option("--csv", o.csv, "CSV with header tenor,xi")->required();
    ingest_cmd->add_option("--asof", o.asof, "as-of time t");
    ingest_cmd->add_option("--nu", o.nu, "vol of vol");
    ingest_cmd->add_option("--H", o.H, "Hurst exponent");
    ingest_cmd->add_option("--horizon", o.horizon, "last grid time (default: last tenor)");
    ingest_cmd->add_option("--steps", o.steps, "grid steps per year");
    ingest_cmd->add_option("--out", o.out, "output file (default stdout)");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        emit_error(err, "config", e.what());
        return 2;
    }
    try {
        if (*price_cmd) return cmd_price(o, out);
        if (*greeks_cmd) return cmd_greeks(o, out);
        if (*surface_cmd) return cmd_surface(o, out, false);
        if (*iv_cmd) return cmd_surface(o, out, true);
        if (*verify_cmd) return cmd_verify(o, out);
        if (*ingest_cmd) return cmd_ingest(o, out);
    } catch (const Error& e) {
        emit_error(err, to_string(e.code()), e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        emit_error(err, "internal", e.what());
        return 1;
    }
    return 2;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace volpath
