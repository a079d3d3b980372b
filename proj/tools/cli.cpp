// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include "linearcredit/calib.hpp"
#include "linearcredit/errors.hpp"
#include "linearcredit/model_io.hpp"
#include "linearcredit/options.hpp"
#include "linearcredit/portfolio.hpp"
#include "linearcredit/pricing.hpp"
#include "linearcredit/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <thread>

namespace linearcredit::cli {

namespace {

using nlohmann::json;

constexpr double kBp = 1e4;
constexpr const char* kFooter =
    "Monetary outputs are in basis points of notional, times in year fractions.\n"
    "Results are written as JSON to stdout; CSV files go to --output-dir.";

struct Common {
    int threads = 0;
    std::string output_dir = ".";
};

struct ModelArgs {
    std::string path;
    std::optional<double> y;
    std::vector<double> x0;
};

struct Contract {
    std::string kind = "bond";
    double t = 0.0;
    double t0 = 0.0;
    double tM = 5.0;
    double r = 0.0;
    double recovery = 0.4;
    int frequency = 4;
};

struct OptionArgs {
    double t = 0.0;
    double t0 = 1.0;
    double tM = 6.0;
    double strike_bp = 300.0;
    double r = 0.0;
    double recovery = 0.4;
    int frequency = 4;
    int order = 20;
};

void add_model(CLI::App* app, ModelArgs& m) {
    app->add_option("--model", m.path, "Model JSON file (lhcc, lhc or linear)")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--y", m.y, "Initial survival level y (default 1), overrides the model state");
    app->add_option("--x0", m.x0,
                    "Initial factor values x (one per factor, or one value for all), overrides "
                    "the model state");
}

void add_option_args(CLI::App* app, OptionArgs& o) {
    app->add_option("--t", o.t, "Valuation time")->capture_default_str();
    app->add_option("--t0", o.t0, "Option expiry and first accrual start")->capture_default_str();
    app->add_option("--tm", o.tM, "Final payment date")->capture_default_str();
    app->add_option("--strike-bp", o.strike_bp, "Strike spread in bp")->capture_default_str();
    app->add_option("--r", o.r, "Constant short rate")->capture_default_str();
    app->add_option("--recovery", o.recovery, "Recovery rate")->capture_default_str();
    app->add_option("--frequency", o.frequency, "Premium payments per year")
        ->capture_default_str();
}

ModelFile load(const ModelArgs& a) { return load_model(a.path); }

State initial_state(const ModelArgs& a, const ModelFile& mf, int m) {
    State s;
    if (mf.state)
        s = *mf.state;
    if (a.y)
        s.y = *a.y;
    if (!a.x0.empty()) {
        require(a.x0.size() == 1 || static_cast<int>(a.x0.size()) == m, ErrorKind::InvalidInput,
                "--x0: expected 1 or " + std::to_string(m) + " values");
        if (a.x0.size() == 1)
            s.x = Vector::Constant(m, a.x0[0]);
        else
            s.x = Eigen::Map<const Vector>(a.x0.data(), m);
    }
    require(s.x.size() == m, ErrorKind::InvalidInput,
            "initial state: give --x0 or a \"state\" in the model file");
    check_state(s, m);
    return s;
}

CdsOptionSpec cds_option_spec(const OptionArgs& o) {
    CdsOptionSpec spec;
    spec.t0 = o.t0;
    spec.tM = o.tM;
    spec.strike = o.strike_bp / kBp;
    spec.recovery = o.recovery;
    spec.r = o.r;
    spec.frequency = o.frequency;
    return spec;
}

json stats_json(const MaturityStats& s) {
    return {{"tenor", s.tenor}, {"count", s.count}, {"rmse_bp", s.rmse},
            {"median_bp", s.median}, {"min_bp", s.min}, {"max_bp", s.max}};
}

std::filesystem::path output_file(const Common& c, const std::string& name) {
    std::filesystem::create_directories(c.output_dir);
    return std::filesystem::path(c.output_dir) / name;
}

std::ofstream open_csv(const std::filesystem::path& p) {
    std::ofstream f(p);
    require(f.good(), ErrorKind::InvalidInput, "cannot write " + p.string());
    f << std::setprecision(12);
    return f;
}

int resolve_threads(int requested) {
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("LINEARCREDIT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        require(end != env && *end == '\0' && v > 0, ErrorKind::InvalidInput,
                "LINEARCREDIT_THREADS must be a positive integer");
        return static_cast<int>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::Capacity:
        return kExitCapacity;
    case ErrorKind::Calibration:
    case ErrorKind::Unsupported:
        return kExitFailure;
    default:
        return kExitValidation;
    }
}

json error_json(const std::string& kind, const std::string& message) {
    return {{"error", {{"kind", kind}, {"message", message}}}};
}

// Subcommands

json cmd_validate(const ModelArgs& ma, double tol, bool& valid) {
    const ModelFile mf = load(ma);
    json out{{"type", mf.kind == ModelKind::Lhcc ? "lhcc" : mf.kind == ModelKind::Lhc ? "lhc"
                                                                                       : "linear"}};
    valid = true;
    if (mf.kind == ModelKind::Linear) {
        out["valid"] = true;
        return out;
    }
    const ValidationReport rep = validate_lhc(mf.as_lhc());
    valid = rep.valid;
    out["lhc"] = {{"valid", rep.valid},
                  {"slack_zero", json_io::to_json(rep.slack_zero)},
                  {"slack_upper", json_io::to_json(rep.slack_upper)},
                  {"messages", rep.messages}};
    if (mf.kind == ModelKind::Lhcc) {
        const Vector slack = lhcc_slack(mf.lhcc);
        std::vector<bool> binding;
        bool feasible = true;
        for (Eigen::Index i = 0; i < slack.size(); ++i) {
            feasible = feasible && slack(i) >= -1e-12;
            binding.push_back(std::abs(slack(i)) <= tol);
        }
        valid = valid && feasible;
        out["cascade"] = {{"slack", json_io::to_json(slack)},
                          {"binding", binding},
                          {"binding_tolerance", tol},
                          {"feasible", feasible}};
    }
    if (mf.state)
        out["state_in_domain"] = in_state_space(*mf.state);
    out["valid"] = valid;
    return out;
}

json cmd_price(const ModelArgs& ma, const Contract& c) {
    const ModelFile mf = load(ma);
    const LinearModel model = mf.as_linear();
    require(model.n == 1, ErrorKind::Unsupported, "price: single-block models only");
    const Vector yx = stacked(initial_state(ma, mf, model.m));
    json out{{"contract", c.kind}, {"t", c.t}, {"tm", c.tM}};
    if (c.kind == "bond") {
        out["price"] = bond_zero(model, yx, c.t, c.tM, c.r);
    } else if (c.kind == "recovery-maturity") {
        out["price"] = bond_recovery_maturity(model, yx, c.t, c.tM, c.r, c.recovery);
    } else if (c.kind == "recovery-default") {
        out["price"] = bond_recovery_default(model, yx, c.t, c.tM, c.r, c.recovery);
    } else if (c.kind == "default-payment") {
        out["price"] = value(model, psi_d(model, c.t, c.tM, c.r), yx);
    } else {
        const TenorGrid grid = make_grid(c.t0, c.tM, c.frequency);
        const CdsLegs legs = cds_legs(model, c.t, grid, c.r, c.recovery);
        const double prot = value(model, legs.prot, yx);
        const double prem = value(model, legs.prem, yx);
        out["t0"] = c.t0;
        out["protection"] = prot;
        out["premium"] = prem;
        out["spread_bp"] = kBp * prot / prem;
    }
    return out;
}

json option_json(const OptionPrice& p) {
    return {{"price", p.price},
            {"error_bound", p.error_bound},
            {"price_bp", kBp * p.price},
            {"error_bound_bp", kBp * p.error_bound}};
}

json cmd_option(const ModelArgs& ma, const OptionArgs& o) {
    const ModelFile mf = load(ma);
    const LhcParams p = mf.as_lhc();
    const State s = initial_state(ma, mf, p.m);
    json out = option_json(cds_option_price(p, s, o.t, cds_option_spec(o), o.order));
    out["order"] = o.order;
    out["strike_bp"] = o.strike_bp;
    return out;
}

json cmd_cdis(const ModelArgs& ma, const OptionArgs& o, int names, int defaulted) {
    const ModelFile mf = load(ma);
    const LhcParams p = mf.as_lhc();
    const State s = initial_state(ma, mf, p.m);
    CdisOptionSpec spec;
    spec.cds = cds_option_spec(o);
    spec.N = names;
    spec.defaulted = defaulted;
    json out = option_json(cdis_option_homogeneous(p, s, o.t, spec, o.order));
    out["order"] = o.order;
    out["names"] = names;
    out["defaulted"] = defaulted;
    return out;
}

json cmd_tranche(const ModelArgs& ma, const Contract& c, const TrancheSpec& spec) {
    const ModelFile mf = load(ma);
    const LhcParams p = mf.as_lhc();
    const State s = initial_state(ma, mf, p.m);
    const TrancheLegs legs =
        tranche_legs_homogeneous(p, s, c.t, make_grid(c.t0, c.tM, c.frequency), spec, c.r);
    return {{"protection", legs.prot},
            {"premium", legs.prem},
            {"spread_bp", kBp * legs.prot / legs.prem},
            {"names", spec.N},
            {"attach", spec.n_a},
            {"detach", spec.n_d}};
}

json cmd_simulate(const ModelArgs& ma, const PathConfig& cfg, const std::string& export_path,
                  std::ostream& err) {
    const ModelFile mf = load(ma);
    const LhcParams p = mf.as_lhc();
    const State s = initial_state(ma, mf, p.m);
    const PathEnsemble ens = simulate_paths(p, s, cfg);
    const std::size_t n = ens.size();
    const std::size_t last = ens.times.size() - 1;
    std::vector<double> y(n);
    std::vector<std::vector<double>> x(static_cast<std::size_t>(p.m), std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = ens.paths[i].y[0][last];
        for (int j = 0; j < p.m; ++j)
            x[static_cast<std::size_t>(j)][i] = ens.paths[i].x[0](j, static_cast<Eigen::Index>(last));
    }
    const auto mean_se = [](const std::vector<double>& v) {
        const double mean = pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size());
        std::vector<double> sq(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            sq[i] = (v[i] - mean) * (v[i] - mean);
        const double var = v.size() > 1 ? pairwise_sum(sq.data(), sq.size()) /
                                              static_cast<double>(v.size() - 1)
                                        : 0.0;
        return json{{"mean", mean}, {"se", std::sqrt(var / static_cast<double>(v.size()))}};
    };
    json xs = json::array();
    for (const auto& v : x)
        xs.push_back(mean_se(v));
    const LinearModel model = to_linear(p);
    json out{{"paths", n},
             {"dt", cfg.dt},
             {"horizon", ens.times.back()},
             {"seed", cfg.seed},
             {"y_horizon", mean_se(y)},
             {"x_horizon", xs},
             {"bond_closed_form", bond_zero(model, stacked(s), 0.0, ens.times.back(), 0.0)},
             {"clamped_fraction", ens.clamped_fraction()}};
    if (!export_path.empty()) {
        const std::size_t rows = n * ens.times.size();
        if (rows > 1000000)
            err << json{{"warning", "large export: " + std::to_string(rows) + " rows"}}.dump()
                << '\n';
        std::ofstream f = open_csv(export_path);
        f << "path,t,y";
        for (int j = 0; j < p.m; ++j)
            f << ",x" << j + 1;
        f << '\n';
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < ens.times.size(); ++k) {
                f << i << ',' << ens.times[k] << ',' << ens.paths[i].y[0][k];
                for (int j = 0; j < p.m; ++j)
                    f << ',' << ens.paths[i].x[0](j, static_cast<Eigen::Index>(k));
                f << '\n';
            }
        out["export"] = export_path;
    }
    return out;
}

json cmd_calibrate(const Common& common, const std::string& quotes, const CalibOptions& opt,
                   const QuotePanel& meta) {
    QuotePanel panel = load_panel(quotes);
    panel.recovery = meta.recovery;
    panel.r = meta.r;
    panel.frequency = meta.frequency;
    const CalibResult res = calibrate(panel, opt);
    const auto rmse_path = output_file(common, "rmse.csv");
    const auto factors_path = output_file(common, "factors.csv");
    {
        std::ofstream f = open_csv(rmse_path);
        write_report_csv(f, res.report);
        std::ofstream g = open_csv(factors_path);
        write_factors_csv(g, res.filter);
    }
    json by = json::array();
    for (const auto& s : res.report.by_maturity)
        by.push_back(stats_json(s));
    json starts = json::array();
    for (const auto& s : res.starts)
        starts.push_back({{"objective", s.objective},
                          {"iterations", s.iterations},
                          {"feasible", s.feasible}});
    ModelFile mf;
    mf.kind = ModelKind::Lhcc;
    mf.lhcc = res.params;
    std::size_t skipped = 0;
    for (bool b : res.filter.skipped)
        skipped += b ? 1 : 0;
    return {{"model", model_to_json(mf)},
            {"slack", json_io::to_json(lhcc_slack(res.params))},
            {"objective_bp2", res.objective},
            {"rmse", stats_json(res.report.all)},
            {"by_maturity", by},
            {"best_start", res.best_start},
            {"starts", starts},
            {"dates", res.filter.dates.size()},
            {"skipped_dates", skipped},
            {"rmse_csv", rmse_path.string()},
            {"factors_csv", factors_path.string()}};
}

json cmd_convergence(const Common& common, const ModelArgs& ma, const OptionArgs& o,
                     int max_order) {
    require(max_order >= 1, ErrorKind::InvalidInput, "--max-order must be positive");
    const ModelFile mf = load(ma);
    const LhcParams p = mf.as_lhc();
    const State s = initial_state(ma, mf, p.m);
    const auto path = output_file(common, "convergence.csv");
    std::ofstream f = open_csv(path);
    f << "order,price_bp,bound_bp\n";
    json rows = json::array();
    for (int n = 1; n <= max_order; ++n) {
        const OptionPrice op = cds_option_price(p, s, o.t, cds_option_spec(o), n);
        f << n << ',' << kBp * op.price << ',' << kBp * op.error_bound << '\n';
        rows.push_back({{"order", n}, {"price_bp", kBp * op.price},
                        {"bound_bp", kBp * op.error_bound}});
    }
    return {{"strike_bp", o.strike_bp}, {"rows", rows}, {"csv", path.string()}};
}

json cmd_sensitivity(const Common& common, const ModelArgs& ma, const OptionArgs& o,
                     const std::vector<double>& sigmas, const std::vector<double>& x0s) {
    const ModelFile mf = load(ma);
    const LhcParams base = mf.as_lhc();
    const State s = initial_state(ma, mf, base.m);
    const CdsOptionSpec spec = cds_option_spec(o);
    const auto sigma_path = output_file(common, "sensitivity_sigma.csv");
    const auto x0_path = output_file(common, "sensitivity_x0.csv");
    json by_sigma = json::array();
    json by_x0 = json::array();
    {
        std::ofstream f = open_csv(sigma_path);
        f << "sigma,price_bp\n";
        for (double sig : sigmas) {
            LhcParams p = base;
            p.sigma = Vector::Constant(p.m, sig);
            const double v = kBp * cds_option_price(p, s, o.t, spec, o.order).price;
            f << sig << ',' << v << '\n';
            by_sigma.push_back({{"sigma", sig}, {"price_bp", v}});
        }
    }
    {
        std::ofstream f = open_csv(x0_path);
        f << "x0,price_bp\n";
        for (double x0 : x0s) {
            State sx = s;
            sx.x = Vector::Constant(base.m, x0 * s.y);
            check_state(sx, base.m);
            const double v = kBp * cds_option_price(base, sx, o.t, spec, o.order).price;
            f << x0 << ',' << v << '\n';
            by_x0.push_back({{"x0", x0}, {"price_bp", v}});
        }
    }
    return {{"order", o.order},
            {"strike_bp", o.strike_bp},
            {"sigma", by_sigma},
            {"x0", by_x0},
            {"sigma_csv", sigma_path.string()},
            {"x0_csv", x0_path.string()}};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Linear credit risk models: pricing, options, simulation and calibration",
                 "linearcredit"};
    app.footer(kFooter);
    app.require_subcommand(1, 1);
    Common common;
    app.add_option("--threads", common.threads,
                   "Worker threads (default: LINEARCREDIT_THREADS, else all cores)");
    app.add_option("--output-dir", common.output_dir, "Directory for CSV outputs")
        ->capture_default_str();

    ModelArgs ma;
    Contract contract;
    OptionArgs opt_args;

    auto* validate = app.add_subcommand("validate", "Check model parameter constraints");
    double binding_tol = 5e-3;
    add_model(validate, ma);
    validate->add_option("--binding-tol", binding_tol,
                         "Cascade slack below which a constraint is reported binding")
        ->capture_default_str();

    auto* price = app.add_subcommand("price", "Closed-form bond and CDS prices");
    add_model(price, ma);
    price->add_option("--contract", contract.kind, "Contract type")
        ->check(CLI::IsMember({"bond", "recovery-maturity", "recovery-default",
                               "default-payment", "cds"}))
        ->capture_default_str();
    price->add_option("--t", contract.t, "Valuation time")->capture_default_str();
    price->add_option("--t0", contract.t0, "CDS first accrual start")->capture_default_str();
    price->add_option("--tm", contract.tM, "Maturity")->capture_default_str();
    price->add_option("--r", contract.r, "Constant short rate")->capture_default_str();
    price->add_option("--recovery", contract.recovery, "Recovery rate")->capture_default_str();
    price->add_option("--frequency", contract.frequency, "CDS payments per year")
        ->capture_default_str();

    auto* option = app.add_subcommand("option", "CDS option by Legendre payoff expansion");
    add_model(option, ma);
    add_option_args(option, opt_args);
    option->add_option("--order", opt_args.order, "Polynomial order")->capture_default_str();

    auto* cdis = app.add_subcommand("cdis", "Homogeneous CDIS option by Chebyshev expansion");
    int names = 5;
    int defaulted = 0;
    add_model(cdis, ma);
    add_option_args(cdis, opt_args);
    cdis->add_option("--order", opt_args.order, "Chebyshev order per dimension")
        ->capture_default_str();
    cdis->add_option("--names", names, "Number of names in the index")->capture_default_str();
    cdis->add_option("--defaulted", defaulted, "Names already defaulted")->capture_default_str();

    auto* tranche = app.add_subcommand("tranche", "Homogeneous CDO tranche legs");
    TrancheSpec tspec;
    tspec.N = 5;
    tspec.n_d = 3;
    add_model(tranche, ma);
    tranche->add_option("--t", contract.t, "Valuation time")->capture_default_str();
    tranche->add_option("--t0", contract.t0, "First accrual start")->capture_default_str();
    tranche->add_option("--tm", contract.tM, "Maturity")->capture_default_str();
    tranche->add_option("--r", contract.r, "Constant short rate")->capture_default_str();
    tranche->add_option("--recovery", tspec.recovery, "Recovery rate")->capture_default_str();
    tranche->add_option("--frequency", contract.frequency, "Payments per year")
        ->capture_default_str();
    tranche->add_option("--names", tspec.N, "Number of names")->capture_default_str();
    tranche->add_option("--defaulted", tspec.defaulted, "Names already defaulted")
        ->capture_default_str();
    tranche->add_option("--attach", tspec.n_a, "Attachment in defaulted names")
        ->capture_default_str();
    tranche->add_option("--detach", tspec.n_d, "Detachment in defaulted names")
        ->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "Euler simulation of the factor process");
    PathConfig cfg;
    std::string export_path;
    add_model(simulate, ma);
    simulate->add_option("--paths", cfg.paths, "Number of paths")->capture_default_str();
    simulate->add_option("--dt", cfg.dt, "Euler step")->capture_default_str();
    simulate->add_option("--horizon", cfg.horizon, "Simulation horizon")->capture_default_str();
    simulate->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    simulate->add_option("--record-every", cfg.record_every, "Keep every k-th grid point")
        ->capture_default_str();
    simulate->add_option("--export", export_path,
                         "Write all paths as CSV (path,t,y,x1..); can be large");

    auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit a cascade model to CDS quotes");
    std::string quotes;
    CalibOptions copt;
    QuotePanel meta;
    double gamma1 = std::numeric_limits<double>::quiet_NaN();
    calibrate_cmd->add_option("--quotes", quotes, "CSV with date,tenor_years,spread_bp")
        ->required()
        ->check(CLI::ExistingFile);
    calibrate_cmd->add_option("--m", copt.m, "Number of factors")->capture_default_str();
    calibrate_cmd->add_option("--gamma1", gamma1, "Fix gamma1 instead of fitting it");
    calibrate_cmd->add_option("--starts", copt.starts, "Random starting points")
        ->capture_default_str();
    calibrate_cmd->add_option("--seed", copt.seed, "Seed of the starting points")
        ->capture_default_str();
    calibrate_cmd->add_option("--max-iterations", copt.max_iterations,
                              "Nelder-Mead iterations per pass")
        ->capture_default_str();
    calibrate_cmd->add_option("--sigma", copt.sigma, "Volatility stored with the fit")
        ->capture_default_str();
    calibrate_cmd->add_option("--recovery", meta.recovery, "Recovery rate")
        ->capture_default_str();
    calibrate_cmd->add_option("--r", meta.r, "Constant short rate")->capture_default_str();
    calibrate_cmd->add_option("--frequency", meta.frequency, "Premium payments per year")
        ->capture_default_str();

    auto* convergence = app.add_subcommand("convergence", "CDS option price and bound by order");
    int max_order = 30;
    add_model(convergence, ma);
    add_option_args(convergence, opt_args);
    convergence->add_option("--max-order", max_order, "Largest order")->capture_default_str();

    auto* sensitivity =
        app.add_subcommand("sensitivity", "CDS option price against sigma and x0");
    std::vector<double> sigmas{0.25, 0.5, 0.75, 1.0};
    std::vector<double> x0s{0.1, 0.2, 0.3};
    add_model(sensitivity, ma);
    add_option_args(sensitivity, opt_args);
    sensitivity->add_option("--order", opt_args.order, "Polynomial order")->capture_default_str();
    sensitivity->add_option("--sigmas", sigmas, "Volatilities")->capture_default_str();
    sensitivity->add_option("--x0s", x0s, "Initial factor levels")->capture_default_str();

    for (auto* sub : app.get_subcommands({}))
        sub->footer(kFooter);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << error_json("usage", e.what()).dump() << '\n';
        return kExitValidation;
    }

    try {
        const int threads = resolve_threads(common.threads);
        bool ok = true;
        json result;
        if (*validate) {
            result = cmd_validate(ma, binding_tol, ok);
        } else if (*price) {
            result = cmd_price(ma, contract);
        } else if (*option) {
            result = cmd_option(ma, opt_args);
        } else if (*cdis) {
            result = cmd_cdis(ma, opt_args, names, defaulted);
        } else if (*tranche) {
            result = cmd_tranche(ma, contract, tspec);
        } else if (*simulate) {
            cfg.threads = threads;
            result = cmd_simulate(ma, cfg, export_path, err);
        } else if (*calibrate_cmd) {
            copt.threads = threads;
            if (!std::isnan(gamma1))
                copt.fixed_gamma1 = gamma1;
            result = cmd_calibrate(common, quotes, copt, meta);
        } else if (*convergence) {
            result = cmd_convergence(common, ma, opt_args, max_order);
        } else if (*sensitivity) {
            result = cmd_sensitivity(common, ma, opt_args, sigmas, x0s);
        }
        out << result.dump(2) << '\n';
        return ok ? kExitOk : kExitValidation;
    } catch (const Error& e) {
        err << error_json(to_string(e.kind()), e.what()).dump() << '\n';
        return exit_code(e.kind());
    } catch (const nlohmann::json::exception& e) {
        err << error_json("invalid_input", e.what()).dump() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << error_json("internal", e.what()).dump() << '\n';
        return kExitFailure;
    }
}

}  // namespace linearcredit::cli
