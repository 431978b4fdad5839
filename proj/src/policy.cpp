#include "wedge/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "wedge/errors.hpp"

namespace wedge {

std::string to_string(Action a) {
    switch (a) {
        case Action::Buy: return "Buy";
        case Action::Sell: return "Sell";
        case Action::NoTrade: return "NoTrade";
    }
    return "?";
}

bool solvent(double x, double y_theta, double lambda, double gamma) {
    const double liq = y_theta >= 0.0 ? (1.0 - gamma) * y_theta : (1.0 + lambda) * y_theta;
    return x + liq > 0.0;
}

MertonReference merton_reference(const DimensionlessParams& d) {
    const QuadraticGeometry g = geometry(d);
    if (!(g.mM > 0.0)) {
        std::ostringstream os;
        os << "frictionless problem is ill-posed: m(q_M) = " << g.mM << " <= 0";
        throw WedgeError(ErrorKind::MertonIllPosed, os.str(), g.mM);
    }
    return {g.qM, std::pow(g.mM, -g.R)};
}

PolicyNode PolicySpec::at_q(double q) const {
    const SolutionCurve& c = solution_.curve;
    const QuadraticGeometry& g = geometry_;
    const double u = c.scaled_eta(q);
    const double eta = c.eta(q);
    const double phi = phi_offset_ + c.direction * c.integral_to(q);
    const double E = std::exp(phi);
    const double em1 = std::expm1(-phi);  // e^{-phi} - 1

    PolicyNode nd;
    nd.q = q;
    const double D = 1.0 - q + q * E;
    nd.n = g.m(q) + g.k * eta;
    nd.p = q * E / D;
    nd.G = std::pow(nd.n, -R) * std::pow(D, R - 1.0);
    nd.dG = (1.0 - R) * nd.G * D * em1;
    nd.consumption = nd.n / D;

    // d/dq along the curve, then divided by dp/dq.
    const double w = q - (1.0 - q) * u;
    const double gap = u / (q * w);
    const double dp = q * E / (D * D * w);
    const double dD = (E - 1.0) + q * E * gap;
    const double dGq = nd.dG * dp;
    const double dF = (1.0 - R) * (dGq * D * em1 + nd.G * dD * em1 - nd.G * D * (em1 + 1.0) * gap);
    nd.d2G = dF / dp;
    return nd;
}

std::size_t PolicySpec::segment(double p) const {
    auto it = std::upper_bound(table.begin(), table.end(), p,
                               [](double v, const PolicyNode& n) { return v < n.p; });
    std::size_t i = static_cast<std::size_t>(it - table.begin());
    if (i == 0) return 0;
    return std::min(i - 1, table.size() - 2);
}

namespace {

struct Hermite {
    double h, t, h00, h10, h01, h11;
};

Hermite basis(double p0, double p1, double p) {
    Hermite b;
    b.h = p1 - p0;
    b.t = (p - p0) / b.h;
    const double t = b.t, t2 = t * t, t3 = t2 * t;
    b.h00 = 2 * t3 - 3 * t2 + 1;
    b.h10 = t3 - 2 * t2 + t;
    b.h01 = -2 * t3 + 3 * t2;
    b.h11 = t3 - t2;
    return b;
}

}  // namespace

double PolicySpec::G(double p) const {
    if (p < p_star) {
        const PolicyNode& a = table.front();
        return a.G * std::pow((1.0 + lambda * p) / (1.0 + lambda * p_star), 1.0 - R);
    }
    if (p > p_upper) {
        const PolicyNode& b = table.back();
        return b.G * std::pow((1.0 - gamma * p) / (1.0 - gamma * p_upper), 1.0 - R);
    }
    const std::size_t i = segment(p);
    const PolicyNode& a = table[i];
    const PolicyNode& b = table[i + 1];
    const Hermite hb = basis(a.p, b.p, p);
    return hb.h00 * a.G + hb.h10 * hb.h * a.dG + hb.h01 * b.G + hb.h11 * hb.h * b.dG;
}

double PolicySpec::dG(double p) const {
    if (p < p_star) {
        const PolicyNode& a = table.front();
        const double base = 1.0 + lambda * p_star;
        return a.G * (1.0 - R) * lambda / base * std::pow((1.0 + lambda * p) / base, -R);
    }
    if (p > p_upper) {
        const PolicyNode& b = table.back();
        const double base = 1.0 - gamma * p_upper;
        return -b.G * (1.0 - R) * gamma / base * std::pow((1.0 - gamma * p) / base, -R);
    }
    const std::size_t i = segment(p);
    const PolicyNode& a = table[i];
    const PolicyNode& b = table[i + 1];
    const double h = b.p - a.p;
    const double t = (p - a.p) / h;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * (a.G - b.G)) / h + (3 * t2 - 4 * t + 1) * a.dG +
           (3 * t2 - 2 * t) * b.dG;
}

double PolicySpec::consumption_base(double p) const { return G(p) - p * dG(p) / (1.0 - R); }

double PolicySpec::consumption_rate(double p) const {
    return beta / R * std::pow(consumption_base(p), -1.0 / R);
}

Action PolicySpec::action(double p) const {
    if (p < p_star) return Action::Buy;
    if (p > p_upper) return Action::Sell;
    return Action::NoTrade;
}

CurvatureMatch PolicySpec::curvature_match() const {
    CurvatureMatch cm;
    const PolicyNode lo = at_q(q_star);
    const PolicyNode hi = at_q(q_upper);
    cm.inner_lower = lo.d2G;
    cm.inner_upper = hi.d2G;
    const double bl = 1.0 + lambda * p_star;
    cm.outer_lower = -R * (1.0 - R) * lambda * lambda * lo.G / (bl * bl);
    const double bu = 1.0 - gamma * p_upper;
    cm.outer_upper = -R * (1.0 - R) * gamma * gamma * hi.G / (bu * bu);
    return cm;
}

double PolicySpec::discount(double t) const { return std::exp(-beta * t); }

PolicySpec build_policy(const WedgeSolution& w, const DimensionlessParams& d,
                        std::size_t nodes) {
    if (nodes < 2) throw WedgeError(ErrorKind::InvalidParams, "policy table needs at least two nodes");
    PolicySpec s;
    s.solution_ = w;
    s.geometry_ = geometry(d);
    s.R = d.R;
    s.beta = d.original.beta;
    s.lambda = d.original.lambda;
    s.gamma = d.original.gamma;
    s.regime = w.regime;
    s.q_star = w.q_star;
    s.q_upper = w.q_upper;

    const double lam = s.lambda, gam = s.gamma;
    s.p_star = w.q_star / (1.0 + lam - lam * w.q_star);
    s.p_upper = w.q_upper / (1.0 - gam + gam * w.q_upper);
    s.z_star = w.q_star / ((1.0 + lam) * (1.0 - w.q_star));
    s.z_upper = w.q_upper / ((1.0 - gam) * (1.0 - w.q_upper));

    const SolutionCurve& c = w.curve;
    // phi(q) = -ln(1+lambda) + integral of the gap density from q_star to q.
    s.phi_offset_ = -std::log1p(lam);
    if (c.direction < 0) s.phi_offset_ += c.integral_to(w.q_star);

    const QuadraticGeometry& g = s.geometry_;
    s.A_star = std::pow(c.n(w.q_star, g), -s.R);
    s.A_upper = std::pow(c.n(w.q_upper, g), -s.R);

    s.table.resize(nodes);
    const double a = w.q_star, b = w.q_upper;
    for (std::size_t j = 0; j < nodes; ++j) {
        const double th = std::numbers::pi * static_cast<double>(j) / static_cast<double>(nodes - 1);
        double q = 0.5 * (a + b) - 0.5 * (b - a) * std::cos(th);
        if (j == 0) q = a;
        if (j + 1 == nodes) q = b;
        PolicyNode nd = s.at_q(q);
        if (!(nd.n > 0.0) || !(nd.consumption > 0.0) || !std::isfinite(nd.G)) {
            std::ostringstream os;
            os << "value reconstruction failed at q=" << q << " (n=" << nd.n << ")";
            throw WedgeError(ErrorKind::StepFailure, os.str(), q);
        }
        s.table[j] = nd;
    }
    for (std::size_t j = 1; j < nodes; ++j) {
        if (!(s.table[j].p > s.table[j - 1].p)) {
            std::ostringstream os;
            os << "p(q) not increasing near q=" << s.table[j].q;
            throw WedgeError(ErrorKind::StepFailure, os.str(), s.table[j].q);
        }
    }
    // The integrated phi reproduces the closed-form endpoints to quadrature
    // accuracy; pin them so the outer regions join exactly.
    s.table.front().p = s.p_star;
    s.table.back().p = s.p_upper;
    return s;
}

ValuePoint value_at(const PolicySpec& spec, double x, double y_theta) {
    if (!solvent(x, y_theta, spec.lambda, spec.gamma)) {
        std::ostringstream os;
        os << "position (x=" << x << ", y=" << y_theta << ") is insolvent";
        throw WedgeError(ErrorKind::Insolvent, os.str());
    }
    ValuePoint v;
    v.x = x;
    v.y_theta = y_theta;
    const double W = x + y_theta;
    const double p = y_theta / W;
    const double R = spec.R;
    v.V = std::pow(W, 1.0 - R) / (1.0 - R) * std::pow(R / spec.beta, R) * spec.G(p);
    v.C = W * spec.consumption_rate(p);
    v.action = spec.action(p);
    return v;
}

}  // namespace wedge
