#include "wedge/boundary.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

#include "wedge/errors.hpp"

namespace wedge {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

template <class F>
double gk(F f, double a, double b) {
    if (a == b) return 0.0;
    return GK::integrate(f, a, b, 6, 1e-13);
}

double segment_lambda(const CurveSegment& s, int dir) {
    switch (s.chart) {
        case CurveSegment::Chart::Eta: {
            double sum = 0.0;
            const double t_end = s.dense->t_end();
            for (const auto& st : s.dense->steps()) {
                const double b = std::min(st.t0 + st.h, t_end);
                if (b <= st.t0) break;
                sum += gk([&st, dir](double t) { return gap_integrand(dir * t, st.eval(t)[0]); },
                          st.t0, b);
            }
            return sum;
        }
        case CurveSegment::Chart::Tau: {
            double sum = 0.0;
            const double t_end = s.dense->t_end();
            for (const auto& st : s.dense->steps()) {
                const double b = std::min(st.t0 + st.h, t_end);
                if (b <= st.t0) break;
                sum += gk([&st](double tau) { return gap_integrand_tau(-1.0 / tau, st.eval(tau)[0]); },
                          st.t0, b);
            }
            return sum;
        }
        case CurveSegment::Chart::Bridge: {
            const double c2 = s.c2, c3 = s.c3;
            return gk([c2, c3](double x) { return gap_integrand_local(x, c2 + c3 * x); },
                      s.q_from - 1.0, s.q_to - 1.0);
        }
    }
    return 0.0;
}

}  // namespace

std::string to_string(Regime r) {
    switch (r) {
        case Regime::Interior: return "Interior";
        case Regime::CrossesSingularity: return "CrossesSingularity";
        case Regime::AtSingularIVP: return "AtSingularIVP";
    }
    return "?";
}

double lambda_of(const SolutionCurve& c) {
    if (c.end == CurveEnd::HitZero) {
        std::ostringstream os;
        os << "curve from r=" << c.r << " hit zero at q=" << c.zeta;
        throw WedgeError(ErrorKind::IllPosedCurve, os.str(), c.zeta);
    }
    double sum = 0.0;
    for (const auto& s : c.segments) sum += segment_lambda(s, c.direction);
    return sum;
}

double lambda_of(double r, const QuadraticGeometry& g, const ToleranceOptions& opts) {
    return lambda_of(trace_curve(r, g, opts));
}

double closed_form_lambda_under(const QuadraticGeometry& g) {
    if (!g.q_roots)
        throw WedgeError(ErrorKind::RootsNotReal, "m has no real roots (m_M > 0)");
    if (!g.p_roots) throw WedgeError(ErrorKind::RootsNotReal, "ell has no real roots");
    const auto [qm, qp] = *g.q_roots;
    const auto [pm, pp] = *g.p_roots;
    const bool a = pm < 0.0 && 0.0 < qm && qm < qp && qp < 1.0 && 1.0 < pp;
    const bool b = pm < 0.0 && 1.0 < pp && pp < qm && qm < qp;
    const bool c = qm < qp && qp < pm && pm < 0.0 && 0.0 < pp;
    if (!(a || b || c))
        throw WedgeError(ErrorKind::OrderingUnsupported,
                         "root ordering of m and ell not covered by the closed form");
    const double R = g.R;
    const double w = R / (1.0 - R);
    return -std::log(qp / qm) - std::log((1.0 - qm) / (1.0 - qp)) +
           w * (pp - qp) * (pp - qm) / (pp * (pp - 1.0) * (pp - pm)) *
               std::log((pp - qm) / (pp - qp)) -
           w * (qp - pm) * (qm - pm) / (pm * (1.0 - pm) * (pp - pm)) *
               std::log((qp - pm) / (qm - pm));
}

double lambda_at_singular(const QuadraticGeometry& g, const ToleranceOptions& opts) {
    if (!g.crosses_one())
        throw WedgeError(ErrorKind::NotSingularCase,
                         "curves do not cross q = 1 for these parameters");
    return lambda_of(trace_curve(1.0, g, opts));
}

BoundarySolver::BoundarySolver(const QuadraticGeometry& g, const ToleranceOptions& opts)
    : tracer_(g, opts), label_(classify(g)) {
    if (label_.is_boundary()) return;
    wp_ = wellposedness(g);
    if (wp_.kind == WellPosedness::Kind::Conditional) thresholds_.xi_under = wp_.xi_threshold;
    if (wp_.kind == WellPosedness::Kind::IllPosed) return;
    if (g.crosses_one()) {
        lambda_one_ = lambda_of(tracer_.trace(1.0));
        thresholds_.xi_bar = std::expm1(*lambda_one_);
    }
    const bool cond = wp_.kind == WellPosedness::Kind::Conditional;
    if (g.direction() > 0)
        limit_ = cond ? g.q_roots->first : g.qM;
    else
        limit_ = cond ? g.q_roots->second : g.qM;
}

double BoundarySolver::lambda(double r) const { return lambda_of(tracer_.trace(r)); }

WedgeSolution BoundarySolver::solve(double xi) const {
    const QuadraticGeometry& g = geometry();
    if (label_.is_boundary())
        throw WedgeError(ErrorKind::BoundaryCase,
                         "parameters lie on an excluded case boundary: " + label_.name());
    if (wp_.kind == WellPosedness::Kind::IllPosed)
        throw WedgeError(ErrorKind::IllPosedAlways,
                         "the problem is ill-posed for every transaction cost (case " +
                             label_.name() + ")");
    if (!(xi > 0.0) || !std::isfinite(xi))
        throw WedgeError(ErrorKind::InvalidParams, "xi must be positive and finite");
    if (thresholds_.xi_under && xi <= *thresholds_.xi_under) {
        std::ostringstream os;
        os.precision(17);
        os << "ill-posed for xi=" << xi << "; requires xi > " << *thresholds_.xi_under;
        throw WedgeError(ErrorKind::IllPosedForThisXi, os.str(), *thresholds_.xi_under);
    }

    WedgeSolution w;
    w.thresholds = thresholds_;
    const double target = std::log1p(xi);
    const int dir = g.direction();

    if (lambda_one_ && std::abs(xi - *thresholds_.xi_bar) <= 1e-9 * *thresholds_.xi_bar) {
        w.curve = tracer_.trace(1.0);
        w.r = 1.0;
        w.q_star = 1.0;
        w.q_upper = w.curve.zeta;
        w.lambda_value = *lambda_one_;
        w.regime = Regime::AtSingularIVP;
        return w;
    }

    // Bracket [a, b] in travel order with lambda(a) > target > lambda(b).
    const double nudge = 1e-9 * std::abs(limit_);
    double a = dir * nudge;
    double b = limit_ - dir * nudge;
    w.regime = Regime::Interior;
    if (lambda_one_) {
        if (target > *lambda_one_) {
            b = 1.0;
            w.regime = Regime::CrossesSingularity;
        } else {
            a = 1.0;
        }
    }

    // The integral carried by the integrator agrees with the quadrature to
    // ~1e-11 and costs a fraction of it; the final value is re-evaluated.
    auto f = [this, target](double r) {
        const SolutionCurve c = tracer_.trace(r);
        if (c.end == CurveEnd::HitZero) lambda_of(c);  // throws IllPosedCurve
        return c.carried_integral - target;
    };
    // Lambda diverges only logarithmically at 0, with a slope that can be tiny;
    // walk the travel-start end toward 0 until it brackets the target.
    const double floor = 1e-150 * std::abs(limit_);
    if (a != 1.0) {
        while (!(f(a) > 0.0) && std::abs(a) > floor) {
            b = a;
            a *= 1e-6;
        }
    }
    if (a != 1.0 && !(f(a) > 0.0)) {
        std::ostringstream os;
        os << "xi=" << xi << " exceeds the range resolvable inside the start bracket";
        throw WedgeError(ErrorKind::StepFailure, os.str());
    }
    double r = b;
    if (b == 1.0 || f(b) < 0.0) {
        int it = 0;
        for (; it < 200; ++it) {
            // Geometric midpoint while the bracket spans more than a factor 4.
            const bool wide = a * b > 0.0 && (a / b > 4.0 || b / a > 4.0);
            const double mid = wide ? std::copysign(std::sqrt(a * b), a) : 0.5 * (a + b);
            if (mid == a || mid == b) break;
            if (std::abs(b - a) <= 1e-15 * std::max(std::abs(a), std::abs(b))) break;
            if (f(mid) > 0.0)
                a = mid;
            else
                b = mid;
        }
        w.iterations = it;
        r = 0.5 * (a + b);
    }
    w.r = r;
    w.curve = tracer_.trace(r);
    w.lambda_value = lambda_of(w.curve);
    if (dir > 0) {
        w.q_star = r;
        w.q_upper = w.curve.zeta;
    } else {
        w.q_upper = r;
        w.q_star = w.curve.zeta;
    }
    return w;
}

WedgeSolution solve_boundaries(const DimensionlessParams& d, const ToleranceOptions& opts) {
    return BoundarySolver(geometry(d), opts).solve(d.xi);
}

}  // namespace wedge
