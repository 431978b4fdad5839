#include "wedge/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "wedge/errors.hpp"
#include "wedge/parallel.hpp"

namespace wedge {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Consumption rate C/W on a uniform grid over [p_star, p_upper].
class RateTable {
public:
    RateTable(const PolicySpec& s, std::size_t cells) : lo_(s.p_star), hi_(s.p_upper) {
        v_.resize(cells + 1);
        step_ = (hi_ - lo_) / static_cast<double>(cells);
        for (std::size_t i = 0; i <= cells; ++i)
            v_[i] = s.consumption_rate(i == cells ? hi_ : lo_ + step_ * static_cast<double>(i));
    }
    double operator()(double p) const {
        double t = (p - lo_) / step_;
        t = std::clamp(t, 0.0, static_cast<double>(v_.size() - 1));
        const std::size_t i = std::min(static_cast<std::size_t>(t), v_.size() - 2);
        const double f = t - static_cast<double>(i);
        return v_[i] + f * (v_[i + 1] - v_[i]);
    }

private:
    double lo_, hi_, step_ = 0.0;
    std::vector<double> v_;
};

std::size_t ratio(double a, double b, const char* what) {
    const double r = a / b;
    const double n = std::round(r);
    if (!(n >= 1.0) || std::abs(r - n) > 1e-9 * n) {
        std::ostringstream os;
        os << what << " (" << a << " / " << b << ") is not a positive integer";
        throw WedgeError(ErrorKind::ConfigInvalid, os.str());
    }
    return static_cast<std::size_t>(n);
}

struct PathOut {
    double value = 0.0;
    double tail = 0.0;
    std::size_t buys = 0, sells = 0;
    bool insolvent = false;
};

}  // namespace

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

void validate(const SimConfig& cfg, const PolicySpec& spec) {
    std::ostringstream os;
    if (cfg.paths < 1) os << "paths must be >= 1; ";
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) os << "dt must be positive; ";
    if (!(cfg.horizon >= cfg.dt) || !std::isfinite(cfg.horizon)) os << "horizon must be >= dt; ";
    if (cfg.noise_dt < 0.0 || (cfg.noise_dt > 0.0 && cfg.noise_dt > cfg.dt))
        os << "noise_dt must lie in (0, dt]; ";
    if (!solvent(cfg.x0, cfg.y_theta0, spec.lambda, spec.gamma)) os << "initial position is insolvent; ";
    const std::string msg = os.str();
    if (!msg.empty()) throw WedgeError(ErrorKind::ConfigInvalid, msg.substr(0, msg.size() - 2));
    ratio(cfg.horizon, cfg.dt, "horizon / dt");
    if (cfg.noise_dt > 0.0) ratio(cfg.dt, cfg.noise_dt, "dt / noise_dt");
}

SimResult simulate_policy(const PolicySpec& spec, const DimensionlessParams& d,
                          const SimConfig& cfg) {
    validate(cfg, spec);
    const std::size_t steps = ratio(cfg.horizon, cfg.dt, "horizon / dt");
    const std::size_t sub = cfg.noise_dt > 0.0 ? ratio(cfg.dt, cfg.noise_dt, "dt / noise_dt") : 1;
    const double fine_sd = std::sqrt(cfg.dt / static_cast<double>(sub));

    const double mu = d.original.mu, sigma = d.original.sigma;
    const double beta = spec.beta, R = spec.R;
    const double lam = spec.lambda, gam = spec.gamma;
    const double ps = spec.p_star, pu = spec.p_upper;
    const double dt = cfg.dt;
    const double drift = (mu - 0.5 * sigma * sigma) * dt;
    const double decay = std::exp(-beta * dt);
    const RateTable rate(spec, 4096);

    std::vector<PathOut> out(cfg.paths);
    parallel_for(cfg.paths, [&](std::size_t path) {
        std::mt19937_64 eng(splitmix64(cfg.seed ^ splitmix64(path)));
        std::normal_distribution<double> normal;
        PathOut& po = out[path];
        double x = cfg.x0, y = cfg.y_theta0;
        double disc = 1.0;
        double acc = 0.0;
        for (std::size_t k = 0;; ++k) {
            const double W = x + y;
            const double p = y / W;
            if (p < ps) {
                const double v = (ps * W - y) / (1.0 + lam * ps);
                y += v;
                x -= (1.0 + lam) * v;
                ++po.buys;
            } else if (p > pu) {
                const double v = (y - pu * W) / (1.0 - gam * pu);
                y -= v;
                x += (1.0 - gam) * v;
                ++po.sells;
            }
            const double Wt = x + y;
            const double C = Wt * rate(y / Wt);
            const double u = disc * std::pow(C, 1.0 - R) / (1.0 - R);
            acc += (k == 0 || k == steps) ? 0.5 * u : u;
            if (k == steps) break;

            double dB = 0.0;
            for (std::size_t j = 0; j < sub; ++j) dB += normal(eng);
            x -= C * dt;
            y *= std::exp(drift + sigma * fine_sd * dB);
            disc *= decay;
            if (!solvent(x, y, lam, gam)) {
                po.insolvent = true;
                break;
            }
        }
        acc *= dt;
        if (!po.insolvent) po.tail = std::exp(-beta * cfg.horizon) * value_at(spec, x, y).V;
        po.value = acc + po.tail;
    });

    SimResult res;
    res.paths = cfg.paths;
    res.steps = steps;
    res.dt = dt;
    res.path_values.resize(cfg.paths);
    std::vector<double> tails(cfg.paths);
    std::size_t buys = 0, sells = 0;
    for (std::size_t i = 0; i < cfg.paths; ++i) {
        res.path_values[i] = out[i].value;
        tails[i] = out[i].tail;
        buys += out[i].buys;
        sells += out[i].sells;
        if (out[i].insolvent) ++res.insolvent_paths;
    }
    const double n = static_cast<double>(cfg.paths);
    res.mean_utility = pairwise_sum(res.path_values) / n;
    res.mean_tail = pairwise_sum(tails) / n;
    res.mean_without_tail = res.mean_utility - res.mean_tail;
    std::vector<double> sq(cfg.paths);
    for (std::size_t i = 0; i < cfg.paths; ++i) {
        const double e = res.path_values[i] - res.mean_utility;
        sq[i] = e * e;
    }
    res.std_error = cfg.paths > 1 ? std::sqrt(pairwise_sum(sq) / (n - 1.0) / n) : 0.0;
    res.analytic_value = value_at(spec, cfg.x0, cfg.y_theta0).V;
    res.z_score = compare(res).z_score;
    const double total = n * static_cast<double>(steps + 1);
    res.buy_fraction = static_cast<double>(buys) / total;
    res.sell_fraction = static_cast<double>(sells) / total;
    res.first_action = spec.action(cfg.y_theta0 / (cfg.x0 + cfg.y_theta0));
    return res;
}

DtStudy dt_halving_study(const PolicySpec& spec, const DimensionlessParams& d, SimConfig cfg,
                         std::span<const double> dts) {
    DtStudy st;
    st.dts.assign(dts.begin(), dts.end());
    std::sort(st.dts.begin(), st.dts.end(), std::greater<>());
    if (st.dts.empty()) throw WedgeError(ErrorKind::ConfigInvalid, "dt list is empty");
    cfg.noise_dt = st.dts.back();
    for (double dt : st.dts) {
        cfg.dt = dt;
        st.runs.push_back(simulate_policy(spec, d, cfg));
        st.bias.push_back(st.runs.back().mean_utility - st.runs.back().analytic_value);
    }
    st.trend_non_increasing = true;
    for (std::size_t k = 0; k + 1 < st.runs.size(); ++k) {
        const auto& a = st.runs[k].path_values;
        const auto& b = st.runs[k + 1].path_values;
        std::vector<double> diff(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) diff[i] = b[i] - a[i];
        const double n = static_cast<double>(diff.size());
        const double mean = pairwise_sum(diff) / n;
        for (double& v : diff) v = (v - mean) * (v - mean);
        const double se = diff.size() > 1 ? std::sqrt(pairwise_sum(diff) / (n - 1.0) / n) : 0.0;
        st.increment.push_back(mean);
        st.pair_error.push_back(se);
    }
    for (std::size_t k = 0; k + 1 < st.increment.size(); ++k) {
        const double se = std::hypot(st.pair_error[k], st.pair_error[k + 1]);
        if (std::abs(st.increment[k + 1]) > std::abs(st.increment[k]) + 3.0 * se)
            st.trend_non_increasing = false;
    }
    return st;
}

Verdict compare(const SimResult& sim) {
    Verdict v;
    const double diff = sim.mean_utility - sim.analytic_value;
    if (sim.std_error > 0.0)
        v.z_score = diff / sim.std_error;
    else
        v.z_score = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    v.z_ok = std::abs(v.z_score) <= 3.0;
    return v;
}

Verdict compare(const SimResult& sim, const DtStudy& study) {
    Verdict v = compare(sim);
    v.trend_ok = study.trend_non_increasing;
    return v;
}

}  // namespace wedge
