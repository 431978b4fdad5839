#include "wedge/params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "wedge/boundary.hpp"
#include "wedge/errors.hpp"

namespace wedge {

namespace {

constexpr double kBoundaryBand = 1e-12;

// Natural magnitude for eps comparisons; keeps the band meaningful when the
// critical value itself is zero.
double eps_scale(double eps, double delta, double R) {
    double s = std::max(std::abs(eps), delta * delta * R);
    if (R < 1.0) s = std::max(s, merton_level_eps(delta, R));
    return std::max(s, 1e-300);
}

bool on_value(double eps, double crit, double scale) {
    return eps == crit || std::abs(eps - crit) <= kBoundaryBand * scale;
}

void check_finite(std::vector<std::string>& errs, const char* name, double v) {
    if (!std::isfinite(v)) errs.push_back(std::string(name) + " must be finite");
}

}  // namespace

double merton_level_eps(double delta, double R) {
    return delta * std::sqrt(2.0 * R / (1.0 - R));
}

double level_at_one_eps(double delta, double R) {
    return 1.0 / (1.0 - R) + 0.5 * delta * delta * R;
}

DimensionlessParams reduce_params(const MarketParams& p) {
    std::vector<std::string> errs;
    check_finite(errs, "mu", p.mu);
    check_finite(errs, "sigma", p.sigma);
    check_finite(errs, "beta", p.beta);
    check_finite(errs, "R", p.R);
    check_finite(errs, "lambda", p.lambda);
    check_finite(errs, "gamma", p.gamma);
    if (!(p.sigma > 0.0)) errs.push_back("sigma must be > 0");
    if (!(p.beta > 0.0)) errs.push_back("beta must be > 0");
    if (!(p.R > 0.0)) errs.push_back("R must be > 0");
    if (p.R == 1.0) errs.push_back("R = 1 (log utility) is not supported");
    if (!(p.lambda >= 0.0)) errs.push_back("lambda must be >= 0");
    if (!(p.gamma >= 0.0 && p.gamma < 1.0)) errs.push_back("gamma must lie in [0, 1)");
    if (p.lambda >= 0.0 && p.gamma >= 0.0 && !(p.lambda + p.gamma > 0.0))
        errs.push_back("lambda + gamma must be > 0");
    if (!errs.empty()) {
        std::ostringstream os;
        os << "invalid market parameters:";
        for (const auto& e : errs) os << "\n  " << e;
        throw WedgeError(ErrorKind::InvalidParams, os.str());
    }
    DimensionlessParams d;
    d.eps = p.mu / p.beta;
    d.delta = p.sigma / std::sqrt(p.beta);
    d.R = p.R;
    d.xi = (p.lambda + p.gamma) / (1.0 - p.gamma);
    d.original = p;
    return d;
}

DimensionlessParams make_params(double eps, double delta, double R, double lambda,
                                double gamma) {
    return reduce_params(MarketParams{.mu = eps, .sigma = delta, .beta = 1.0, .R = R,
                                      .lambda = lambda, .gamma = gamma});
}

std::optional<std::pair<double, double>> quadratic_roots(double a, double b, double c) {
    if (a == 0.0) return std::nullopt;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return std::nullopt;
    const double t = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    if (t == 0.0) return std::make_pair(0.0, 0.0);
    double r1 = t / a;
    double r2 = c / t;
    if (r1 > r2) std::swap(r1, r2);
    return std::make_pair(r1, r2);
}

bool QuadraticGeometry::crosses_one() const {
    return eps > 0.0 && qM > 1.0 && m(1.0) > 0.0 && (1.0 - R) * dm(1.0) < 0.0;
}

QuadraticGeometry geometry(double eps, double delta, double R) {
    QuadraticGeometry g;
    g.eps = eps;
    g.delta = delta;
    g.R = R;
    const double h = 0.5 * delta * delta;
    g.k = h * (1.0 - R);
    g.m1 = -eps * (1.0 - R);
    g.m2 = h * R * (1.0 - R);
    g.l1 = (h - eps) * (1.0 - R);
    g.l2 = -h * (1.0 - R) * (1.0 - R);
    g.qM = eps / (delta * delta * R);
    g.mM = 1.0 - eps * eps * (1.0 - R) / (2.0 * delta * delta * R);
    g.q_roots = quadratic_roots(g.m2, g.m1, 1.0);
    g.p_roots = quadratic_roots(g.l2, g.l1, 1.0);
    return g;
}

QuadraticGeometry geometry(const DimensionlessParams& d) {
    return geometry(d.eps, d.delta, d.R);
}

std::string to_string(CaseId id) {
    switch (id) {
        case CaseId::C1AbIIii: return "1AbIIii";
        case CaseId::C1Aa: return "1Aa";
        case CaseId::C1AbIIi: return "1AbIIi";
        case CaseId::C2AII: return "2AII";
        case CaseId::C1AbIii: return "1AbIii";
        case CaseId::C1AbIi: return "1AbIi";
        case CaseId::C2AI: return "2AI";
        case CaseId::C1Bii: return "1Bii";
        case CaseId::C1Bi: return "1Bi";
        case CaseId::C2B: return "2B";
    }
    return "?";
}

std::string to_string(BoundaryKind b) {
    switch (b) {
        case BoundaryKind::SlopeAtZero: return "m'(0)=0";
        case BoundaryKind::LevelAtOne: return "m(1)=0";
        case BoundaryKind::SlopeAtOne: return "m'(1)=0";
        case BoundaryKind::MertonLevel: return "m_M=0";
    }
    return "?";
}

std::string CaseLabel::name() const {
    if (boundary) return "Boundary(" + to_string(*boundary) + ")";
    return id ? to_string(*id) : "?";
}

CaseLabel classify(const QuadraticGeometry& g) {
    const double eps = g.eps, delta = g.delta, R = g.R;
    const double sc = eps_scale(eps, delta, R);
    auto boundary = [](BoundaryKind b) { return CaseLabel{std::nullopt, b}; };
    auto label = [](CaseId c) { return CaseLabel{c, std::nullopt}; };

    // m'(0) = -eps(1-R); the sign of (1-R)m'(0) decides A versus B.
    if (on_value(eps, 0.0, sc)) return boundary(BoundaryKind::SlopeAtZero);
    const bool caseA = (1.0 - R) * g.dm(0.0) < 0.0;

    if (R > 1.0) {
        if (!caseA) return label(CaseId::C2B);
        if (on_value(eps, delta * delta * R, sc)) return boundary(BoundaryKind::SlopeAtOne);
        return (1.0 - R) * g.dm(1.0) > 0.0 ? label(CaseId::C2AII) : label(CaseId::C2AI);
    }

    if (!caseA) {
        if (on_value(-eps, merton_level_eps(delta, R), sc))
            return boundary(BoundaryKind::MertonLevel);
        return g.mM > 0.0 ? label(CaseId::C1Bii) : label(CaseId::C1Bi);
    }
    if (on_value(eps, level_at_one_eps(delta, R), sc)) return boundary(BoundaryKind::LevelAtOne);
    if (g.m(1.0) < 0.0) return label(CaseId::C1Aa);
    if (on_value(eps, delta * delta * R, sc)) return boundary(BoundaryKind::SlopeAtOne);
    if (on_value(eps, merton_level_eps(delta, R), sc)) return boundary(BoundaryKind::MertonLevel);
    const bool caseII = (1.0 - R) * g.dm(1.0) > 0.0;
    const bool mM_pos = g.mM > 0.0;
    if (caseII) return mM_pos ? label(CaseId::C1AbIIii) : label(CaseId::C1AbIIi);
    return mM_pos ? label(CaseId::C1AbIii) : label(CaseId::C1AbIi);
}

CaseLabel classify(const DimensionlessParams& d) { return classify(geometry(d)); }

CaseLabel classify_by_eps_range(double eps, double delta, double R) {
    const double sc = eps_scale(eps, delta, R);
    const double d2R = delta * delta * R;
    auto boundary = [](BoundaryKind b) { return CaseLabel{std::nullopt, b}; };
    auto label = [](CaseId c) { return CaseLabel{c, std::nullopt}; };

    if (on_value(eps, 0.0, sc)) return boundary(BoundaryKind::SlopeAtZero);
    if (R > 1.0) {
        if (eps < 0.0) return label(CaseId::C2B);
        if (on_value(eps, d2R, sc)) return boundary(BoundaryKind::SlopeAtOne);
        return eps < d2R ? label(CaseId::C2AII) : label(CaseId::C2AI);
    }
    const double s = merton_level_eps(delta, R);
    const double u = level_at_one_eps(delta, R);
    if (eps < 0.0) {
        if (on_value(eps, -s, sc)) return boundary(BoundaryKind::MertonLevel);
        return eps > -s ? label(CaseId::C1Bii) : label(CaseId::C1Bi);
    }
    if (on_value(eps, u, sc)) return boundary(BoundaryKind::LevelAtOne);
    if (eps > u) return label(CaseId::C1Aa);
    if (on_value(eps, d2R, sc)) return boundary(BoundaryKind::SlopeAtOne);
    if (on_value(eps, s, sc)) return boundary(BoundaryKind::MertonLevel);
    if (eps < std::min(d2R, s)) return label(CaseId::C1AbIIii);
    if (s < eps && eps < std::min(d2R, u)) return label(CaseId::C1AbIIi);
    if (d2R < eps && eps < s) return label(CaseId::C1AbIii);
    return label(CaseId::C1AbIi);  // max(d2R, s) < eps < u
}

std::string to_string(WellPosedness::Kind k) {
    switch (k) {
        case WellPosedness::Kind::Unconditional: return "Unconditional";
        case WellPosedness::Kind::Conditional: return "Conditional";
        case WellPosedness::Kind::IllPosed: return "IllPosed";
    }
    return "?";
}

WellPosedness wellposedness(const QuadraticGeometry& g) {
    const CaseLabel c = classify(g);
    if (c.is_boundary())
        throw WedgeError(ErrorKind::BoundaryCase,
                         "parameters lie on an excluded case boundary: " + c.name());
    switch (*c.id) {
        case CaseId::C1Aa:
            return {WellPosedness::Kind::IllPosed, 0.0};
        case CaseId::C1AbIIi:
        case CaseId::C1AbIi:
        case CaseId::C1Bi:
            return {WellPosedness::Kind::Conditional,
                    std::expm1(closed_form_lambda_under(g))};
        default:
            return {WellPosedness::Kind::Unconditional, 0.0};
    }
}

WellPosedness wellposedness(const DimensionlessParams& d) {
    return wellposedness(geometry(d));
}

}  // namespace wedge
