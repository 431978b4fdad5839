// wedge: command-line front end for the no-transaction wedge solver.
//
//   wedge classify  --eps E --delta D --R R
//   wedge solve     --eps E --delta D --R R (--xi X | --lambda L --gamma G) [--out-dir DIR]
//   wedge curves    --eps E --delta D --R R --r 0.1,0.2 [--out FILE]
//   wedge sweep     --axis xi|eps --grid ... [--out FILE]
//   wedge simulate  ... [--paths N --dt DT --horizon T --seed S]
//
// Every subcommand also takes --config FILE (JSON); flags override it.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "json_emit.hpp"
#include "wedge/boundary.hpp"
#include "wedge/errors.hpp"
#include "wedge/params.hpp"
#include "wedge/policy.hpp"
#include "wedge/sim.hpp"
#include "wedge/statics.hpp"

namespace {

using namespace wedge;
using cli::Json;

enum Exit { kOk = 0, kBadInput = 2, kBoundary = 3, kIllPosedXi = 4, kIllPosedAlways = 5, kInternal = 10 };

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidParams:
        case ErrorKind::ConfigInvalid:
        case ErrorKind::Insolvent: return kBadInput;
        case ErrorKind::BoundaryCase: return kBoundary;
        case ErrorKind::IllPosedForThisXi: return kIllPosedXi;
        case ErrorKind::IllPosedAlways: return kIllPosedAlways;
        default: return kInternal;
    }
}

struct BadInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flag values and config values land here; flags win.
struct Options {
    std::optional<std::string> config;
    std::map<std::string, double> num;
    std::map<std::string, std::string> str;
    std::map<std::string, std::vector<double>> list;
};

enum class Kind { Number, Integer, String, NumberList };

const std::map<std::string, Kind>& known_keys() {
    static const std::map<std::string, Kind> keys = {
        {"eps", Kind::Number},      {"delta", Kind::Number},     {"R", Kind::Number},
        {"mu", Kind::Number},       {"sigma", Kind::Number},     {"beta", Kind::Number},
        {"lambda", Kind::Number},   {"gamma", Kind::Number},     {"xi", Kind::Number},
        {"rtol", Kind::Number},     {"atol", Kind::Number},      {"event_tol", Kind::Number},
        {"nodes", Kind::Integer},   {"out_dir", Kind::String},   {"out", Kind::String},
        {"r", Kind::NumberList},    {"axis", Kind::String},      {"grid", Kind::NumberList},
        {"paths", Kind::Integer},   {"dt", Kind::Number},        {"horizon", Kind::Number},
        {"seed", Kind::Integer},    {"x0", Kind::Number},        {"y_theta0", Kind::Number},
        {"dt_study", Kind::NumberList},
    };
    return keys;
}

void load_config(Options& o) {
    if (!o.config) return;
    std::ifstream in(*o.config);
    if (!in) throw BadInput("cannot open config file " + *o.config);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw BadInput(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw BadInput("config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto k = known_keys().find(it.key());
        if (k == known_keys().end()) throw BadInput("unknown config key: " + it.key());
        const Json& v = it.value();
        const std::string& key = it.key();
        switch (k->second) {
            case Kind::Number:
                if (!v.is_number()) throw BadInput("config key " + key + " must be a number");
                o.num.try_emplace(key, v.get<double>());
                break;
            case Kind::Integer:
                if (!v.is_number_integer() || v.get<long long>() < 0)
                    throw BadInput("config key " + key + " must be a non-negative integer");
                o.num.try_emplace(key, v.get<double>());
                break;
            case Kind::String:
                if (!v.is_string()) throw BadInput("config key " + key + " must be a string");
                o.str.try_emplace(key, v.get<std::string>());
                break;
            case Kind::NumberList: {
                if (!v.is_array()) throw BadInput("config key " + key + " must be an array");
                std::vector<double> xs;
                for (const auto& e : v) {
                    if (!e.is_number()) throw BadInput("config key " + key + " must hold numbers");
                    xs.push_back(e.get<double>());
                }
                o.list.try_emplace(key, std::move(xs));
                break;
            }
        }
    }
}

std::optional<double> num(const Options& o, const std::string& k) {
    auto it = o.num.find(k);
    if (it == o.num.end()) return std::nullopt;
    return it->second;
}

double require(const Options& o, const std::string& k) {
    auto v = num(o, k);
    if (!v) throw BadInput("missing required parameter --" + k);
    return *v;
}

std::string str(const Options& o, const std::string& k, const std::string& def) {
    auto it = o.str.find(k);
    return it == o.str.end() ? def : it->second;
}

// (eps, delta, R) either directly or from (mu, sigma, beta).
struct Shape {
    double eps, delta, R, beta;
};

Shape shape(const Options& o) {
    Shape s{};
    s.R = require(o, "R");
    s.beta = num(o, "beta").value_or(1.0);
    if (!(s.beta > 0.0)) throw BadInput("beta must be > 0");
    const bool dimless = num(o, "eps") || num(o, "delta");
    const bool market = num(o, "mu") || num(o, "sigma");
    if (dimless && market) throw BadInput("give either eps/delta or mu/sigma, not both");
    if (market) {
        s.eps = require(o, "mu") / s.beta;
        s.delta = require(o, "sigma") / std::sqrt(s.beta);
    } else {
        s.eps = require(o, "eps");
        s.delta = require(o, "delta");
    }
    if (!std::isfinite(s.eps) || !(s.delta > 0.0) || !std::isfinite(s.delta))
        throw BadInput("eps must be finite and delta positive");
    if (!(s.R > 0.0) || s.R == 1.0 || !std::isfinite(s.R))
        throw BadInput("R must be positive and different from 1");
    return s;
}

DimensionlessParams params(const Options& o) {
    const Shape s = shape(o);
    MarketParams m;
    m.beta = s.beta;
    m.mu = s.eps * s.beta;
    m.sigma = s.delta * std::sqrt(s.beta);
    m.R = s.R;
    const auto xi = num(o, "xi");
    const auto lam = num(o, "lambda");
    const auto gam = num(o, "gamma");
    if (xi && (lam || gam)) throw BadInput("give either xi or lambda/gamma, not both");
    if (xi) {
        m.lambda = *xi;
        m.gamma = 0.0;
    } else {
        if (!lam && !gam) throw BadInput("missing transaction costs: give --xi or --lambda/--gamma");
        m.lambda = lam.value_or(0.0);
        m.gamma = gam.value_or(0.0);
    }
    return reduce_params(m);
}

ToleranceOptions tolerances(const Options& o) {
    ToleranceOptions t;
    t.rtol = num(o, "rtol").value_or(t.rtol);
    t.atol = num(o, "atol").value_or(t.atol);
    t.event_tol = num(o, "event_tol").value_or(t.event_tol);
    if (!(t.rtol > 0.0) || !(t.atol > 0.0) || !(t.event_tol > 0.0))
        throw BadInput("tolerances must be positive");
    return t;
}

Json opt_num(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json thresholds_json(const Thresholds& t) {
    Json j;
    j["xi_under"] = opt_num(t.xi_under);
    j["xi_bar"] = opt_num(t.xi_bar);
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw BadInput("cannot write " + path);
    out << text;
}

std::string csv_num(double v) { return cli::fmt17(v) == "null" ? "nan" : cli::fmt17(v); }

// ---- subcommands ----------------------------------------------------------

int cmd_classify(const Options& o) {
    const Shape s = shape(o);
    const QuadraticGeometry g = geometry(s.eps, s.delta, s.R);
    const CaseLabel label = classify(g);
    if (label.is_boundary()) {
        std::cerr << "error: parameters lie on an excluded case boundary: " << label.name() << "\n";
        return kBoundary;
    }
    const WellPosedness wp = wellposedness(g);
    Thresholds th;
    if (wp.kind == WellPosedness::Kind::Conditional) th.xi_under = wp.xi_threshold;
    if (wp.kind != WellPosedness::Kind::IllPosed && g.crosses_one())
        th.xi_bar = std::expm1(lambda_at_singular(g, tolerances(o)));

    Json j;
    j["case"] = label.name();
    j["wellposedness"] = to_string(wp.kind);
    j["q_M"] = g.qM;
    j["m_M"] = g.mM;
    j["thresholds"] = thresholds_json(th);
    std::cout << cli::to_text(j);
    return kOk;
}

Json wedge_json(const WedgeSolution& w, const PolicySpec& p, const DimensionlessParams& d,
                const CaseLabel& label) {
    Json j;
    j["case"] = label.name();
    j["xi"] = d.xi;
    j["lambda"] = d.original.lambda;
    j["gamma"] = d.original.gamma;
    j["q_star"] = w.q_star;
    j["q_upper"] = w.q_upper;
    j["z_star"] = p.z_star;
    j["z_upper"] = p.z_upper;
    j["p_star"] = p.p_star;
    j["p_upper"] = p.p_upper;
    j["Lambda"] = w.lambda_value;
    j["regime"] = to_string(w.regime);
    j["thresholds"] = thresholds_json(w.thresholds);
    return j;
}

int cmd_solve(const Options& o) {
    const DimensionlessParams d = params(o);
    const QuadraticGeometry g = geometry(d);
    const BoundarySolver solver(g, tolerances(o));
    const WedgeSolution w = solver.solve(d.xi);
    const auto nodes = static_cast<std::size_t>(num(o, "nodes").value_or(2048));
    const PolicySpec p = build_policy(w, d, nodes);

    const std::string dir = str(o, "out_dir", ".");
    const Json j = wedge_json(w, p, d, solver.label());
    write_text(dir + "/wedge.json", cli::to_text(j));

    std::ostringstream csv;
    csv << "q,p,n,m,ell,G,C_coeff\n";
    for (const auto& nd : p.table) {
        csv << csv_num(nd.q) << ',' << csv_num(nd.p) << ',' << csv_num(nd.n) << ','
            << csv_num(g.m(nd.q)) << ',' << csv_num(g.ell(nd.q)) << ',' << csv_num(nd.G) << ','
            << csv_num(p.beta / p.R * nd.consumption) << '\n';
    }
    write_text(dir + "/value.csv", csv.str());
    std::cout << cli::to_text(j);
    return kOk;
}

int cmd_curves(const Options& o) {
    const Shape s = shape(o);
    const QuadraticGeometry g = geometry(s.eps, s.delta, s.R);
    const ToleranceOptions tol = tolerances(o);
    std::vector<double> rs;
    if (auto it = o.list.find("r"); it != o.list.end()) rs = it->second;

    std::ostringstream csv;
    csv << "r,q,n,m,ell,status\n";
    for (double r : rs) {
        if (!(g.m(r) > 0.0)) {
            csv << csv_num(r) << ",,,,,invalid_start\n";
            continue;
        }
        try {
            const SolutionCurve c = trace_curve(r, g, tol);
            const std::string status = c.end == CurveEnd::HitZero ? "hit_zero" : "ok";
            for (double q : c.nodes())
                csv << csv_num(r) << ',' << csv_num(q) << ',' << csv_num(c.n(q, g)) << ','
                    << csv_num(g.m(q)) << ',' << csv_num(g.ell(q)) << ',' << status << '\n';
        } catch (const WedgeError& e) {
            csv << csv_num(r) << ",,,,,failed\n";
        }
    }
    write_text(str(o, "out", "-"), csv.str());
    return kOk;
}

int cmd_sweep(const Options& o) {
    const std::string axis = str(o, "axis", "xi");
    auto it = o.list.find("grid");
    if (it == o.list.end()) throw BadInput("missing --grid");
    const std::vector<double>& grid = it->second;

    SweepResult res;
    if (axis == "xi") {
        // Costs only set the lambda/gamma split; default puts xi on purchases.
        Options base = o;
        base.num.erase("xi");
        if (!num(base, "lambda") && !num(base, "gamma")) base.num["lambda"] = 1.0;
        res = sweep_xi(params(base), grid);
    } else if (axis == "eps") {
        // Only delta, R and the costs of the base matter.
        Options base = o;
        base.num[num(o, "sigma") ? "mu" : "eps"] = 1.0;
        const DimensionlessParams d = params(base);
        res = sweep_drift(d, grid);
    } else {
        throw BadInput("--axis must be xi or eps");
    }

    std::ostringstream csv;
    csv << "value,status,case,lambda,gamma,q_star,q_upper,p_star,p_upper,z_star,z_upper,Lambda,"
           "regime,wellposedness\n";
    for (const auto& r : res.rows) {
        const bool ok = r.status == PointStatus::Ok;
        auto f = [&](double v) { return ok ? csv_num(v) : std::string(); };
        csv << csv_num(r.value) << ',' << to_string(r.status) << ',' << r.case_name << ','
            << csv_num(r.lambda) << ',' << csv_num(r.gamma) << ',' << f(r.q_star) << ','
            << f(r.q_upper) << ',' << f(r.p_star) << ',' << f(r.p_upper) << ',' << f(r.z_star)
            << ',' << f(r.z_upper) << ',' << f(r.lambda_value) << ','
            << (ok ? to_string(r.regime) : std::string()) << ','
            << (r.wellposedness ? to_string(*r.wellposedness) : std::string()) << '\n';
    }
    write_text(str(o, "out", "-"), csv.str());
    return kOk;
}

Json sim_json(const SimResult& r) {
    Json j;
    j["paths"] = r.paths;
    j["steps"] = r.steps;
    j["dt"] = r.dt;
    j["mean_utility"] = r.mean_utility;
    j["std_error"] = r.std_error;
    j["mean_without_tail"] = r.mean_without_tail;
    j["mean_tail"] = r.mean_tail;
    j["analytic_value"] = r.analytic_value;
    j["z_score"] = r.z_score;
    j["insolvent_paths"] = r.insolvent_paths;
    j["first_action"] = to_string(r.first_action);
    j["buy_fraction"] = r.buy_fraction;
    j["sell_fraction"] = r.sell_fraction;
    return j;
}

int cmd_simulate(const Options& o) {
    const DimensionlessParams d = params(o);
    const BoundarySolver solver(geometry(d), tolerances(o));
    const WedgeSolution w = solver.solve(d.xi);
    const PolicySpec p = build_policy(w, d);

    SimConfig cfg;
    cfg.paths = static_cast<std::size_t>(num(o, "paths").value_or(10000));
    cfg.dt = num(o, "dt").value_or(1e-3);
    cfg.horizon = num(o, "horizon").value_or(40.0);
    cfg.seed = static_cast<std::uint64_t>(num(o, "seed").value_or(1));
    const auto x0 = num(o, "x0");
    const auto y0 = num(o, "y_theta0");
    if (x0.has_value() != y0.has_value()) throw BadInput("give both --x0 and --y-theta0 or neither");
    if (x0) {
        cfg.x0 = *x0;
        cfg.y_theta0 = *y0;
    } else {
        const double mid = 0.5 * (p.p_star + p.p_upper);
        cfg.x0 = 1.0 - mid;
        cfg.y_theta0 = mid;
    }

    const SimResult r = simulate_policy(p, d, cfg);
    Json j;
    j["wedge"] = wedge_json(w, p, d, solver.label());
    j["config"] = {{"paths", cfg.paths}, {"dt", cfg.dt}, {"horizon", cfg.horizon},
                   {"seed", cfg.seed},   {"x0", cfg.x0}, {"y_theta0", cfg.y_theta0}};
    j["result"] = sim_json(r);
    Verdict v = compare(r);
    if (auto it = o.list.find("dt_study"); it != o.list.end() && !it->second.empty()) {
        const DtStudy st = dt_halving_study(p, d, cfg, it->second);
        Json runs = Json::array();
        for (std::size_t k = 0; k < st.runs.size(); ++k)
            runs.push_back({{"dt", st.dts[k]},
                            {"mean_utility", st.runs[k].mean_utility},
                            {"bias", st.bias[k]},
                            {"std_error", st.runs[k].std_error}});
        j["dt_study"] = {{"runs", runs},
                         {"increment", st.increment},
                         {"pair_error", st.pair_error},
                         {"trend_non_increasing", st.trend_non_increasing}};
        v = compare(r, st);
    }
    j["verdict"] = {{"z_score", v.z_score}, {"z_ok", v.z_ok}, {"trend_ok", v.trend_ok},
                    {"pass", v.pass()}};
    std::cout << cli::to_text(j);
    return kOk;
}

void error_json(ErrorKind k, const std::string& msg, std::optional<double> value) {
    std::cerr << "error: " << msg << "\n";
    Json j;
    j["error"] = std::string(to_string(k));
    j["message"] = msg;
    if (k == ErrorKind::IllPosedForThisXi && value) j["xi_under"] = *value;
    std::cout << cli::to_text(j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal consumption and investment with proportional transaction costs"};
    app.require_subcommand(1);
    Options opts;

    auto number = [&](CLI::App* sc, const std::string& flag, const std::string& key,
                      const std::string& help) {
        sc->add_option_function<double>(flag, [&opts, key](double v) { opts.num[key] = v; }, help);
    };
    auto numbers = [&](CLI::App* sc, const std::string& flag, const std::string& key,
                       const std::string& help) {
        sc->add_option_function<std::vector<double>>(
              flag, [&opts, key](const std::vector<double>& v) { opts.list[key] = v; }, help)
            ->delimiter(',')
            ->allow_extra_args(false);
    };
    auto text = [&](CLI::App* sc, const std::string& flag, const std::string& key,
                    const std::string& help) {
        sc->add_option_function<std::string>(
            flag, [&opts, key](const std::string& v) { opts.str[key] = v; }, help);
    };
    auto common = [&](CLI::App* sc) {
        sc->add_option("--config", opts.config, "JSON config file; flags override its values");
        number(sc, "--eps", "eps", "drift over discount rate");
        number(sc, "--delta", "delta", "volatility over sqrt(discount rate)");
        number(sc, "--R", "R", "relative risk aversion");
        number(sc, "--mu", "mu", "drift (with --sigma, --beta)");
        number(sc, "--sigma", "sigma", "volatility");
        number(sc, "--beta", "beta", "discount rate (default 1)");
        number(sc, "--rtol", "rtol", "ODE relative tolerance");
        number(sc, "--atol", "atol", "ODE absolute tolerance");
        number(sc, "--event-tol", "event_tol", "event location tolerance");
    };
    auto costs = [&](CLI::App* sc) {
        number(sc, "--xi", "xi", "round-trip cost, charged on purchases");
        number(sc, "--lambda", "lambda", "proportional cost on purchases");
        number(sc, "--gamma", "gamma", "proportional cost on sales");
    };

    auto* classify_cmd = app.add_subcommand("classify", "case label, well-posedness and thresholds");
    common(classify_cmd);

    auto* solve_cmd = app.add_subcommand("solve", "wedge boundaries and value table");
    common(solve_cmd);
    costs(solve_cmd);
    text(solve_cmd, "--out-dir", "out_dir", "directory for wedge.json and value.csv");
    number(solve_cmd, "--nodes", "nodes", "value table nodes (default 2048)");

    auto* curves_cmd = app.add_subcommand("curves", "candidate curves n_r as long-format CSV");
    common(curves_cmd);
    numbers(curves_cmd, "--r", "r", "start abscissae, comma separated");
    text(curves_cmd, "--out", "out", "output file (default stdout)");

    auto* sweep_cmd = app.add_subcommand("sweep", "boundaries across a grid of xi or eps");
    common(sweep_cmd);
    costs(sweep_cmd);
    text(sweep_cmd, "--axis", "axis", "xi or eps");
    numbers(sweep_cmd, "--grid", "grid", "grid values, comma separated");
    text(sweep_cmd, "--out", "out", "output file (default stdout)");

    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo check of the value function");
    common(sim_cmd);
    costs(sim_cmd);
    number(sim_cmd, "--paths", "paths", "number of paths");
    number(sim_cmd, "--dt", "dt", "time step");
    number(sim_cmd, "--horizon", "horizon", "simulation horizon");
    number(sim_cmd, "--seed", "seed", "master seed");
    number(sim_cmd, "--x0", "x0", "initial cash");
    number(sim_cmd, "--y-theta0", "y_theta0", "initial risky wealth");
    numbers(sim_cmd, "--dt-study", "dt_study", "time steps for the dt-halving study");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kBadInput;
    }

    try {
        for (const auto& [key, kind] : known_keys()) {
            auto it = opts.num.find(key);
            if (kind == Kind::Integer && it != opts.num.end() &&
                !(it->second >= 0.0 && std::floor(it->second) == it->second))
                throw BadInput("--" + key + " must be a non-negative integer");
        }
        load_config(opts);
        if (classify_cmd->parsed()) return cmd_classify(opts);
        if (solve_cmd->parsed()) return cmd_solve(opts);
        if (curves_cmd->parsed()) return cmd_curves(opts);
        if (sweep_cmd->parsed()) return cmd_sweep(opts);
        if (sim_cmd->parsed()) return cmd_simulate(opts);
    } catch (const BadInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const WedgeError& e) {
        error_json(e.kind(), e.what(), e.value());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kInternal;
}
