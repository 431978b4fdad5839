#include "wedge/curve.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <sstream>

#include "wedge/errors.hpp"

namespace wedge {

namespace {

using ode::State;

// Below this level a stalled curve is taken to have reached n = 0: near the
// root of ell the ODE degenerates and the step size collapses just before it.
constexpr double kZeroLevel = 1e-8;

struct Local {
    const QuadraticGeometry& g;
    double k;
    double C;  // (1-R)/(R k) = 2/(delta^2 R)

    explicit Local(const QuadraticGeometry& geo)
        : g(geo), k(geo.k), C(2.0 / (geo.delta * geo.delta * geo.R)) {}

    double n(double q, double eta) const { return g.m(q) + k * eta; }

    // d eta / dq from the curve ODE.
    double eta_slope(double q, double eta) const {
        const double s = q * (1.0 - q);
        return -C * n(q, eta) * eta / ((1.0 - q) * (s - eta)) - g.dm(q) / k;
    }

    // du/dtau with q = 1 + x, x = -1/tau, eta = x^2 u.
    double u_slope(double x, double u) const {
        const double q = 1.0 + x;
        const double nn = g.m(q) + k * x * x * u;
        return -C * nn * u / (1.0 + x + x * u) - g.dm(q) / k - 2.0 * x * u;
    }
};

ode::Tolerances tolerances(const ToleranceOptions& o) {
    ode::Tolerances t;
    t.rtol = o.rtol;
    t.atol = o.atol;
    t.event_tol = o.event_tol;
    return t;
}

struct ChartRun {
    ode::Run run;
    CurveSegment seg;
};

// Eta chart in the signed coordinate t = dir q, so integration always runs
// forward. Leftward curves are the q -> -q mirror of the rightward machinery.
ChartRun run_eta(const Local& L, int dir, double q0, double eta0, double q_end, double h0,
                 const ToleranceOptions& opts, bool with_event) {
    const ode::Rhs f = [&L, dir](double t, const State& y) -> State {
        const double q = dir * t;
        return {dir * L.eta_slope(q, y[0]), gap_integrand(q, y[0])};
    };
    const ode::Scalar event = [](double, const State& y) { return y[0]; };
    const ode::Scalar guard = [&L, dir](double t, const State& y) { return L.n(dir * t, y[0]); };
    ChartRun out;
    out.run = ode::integrate(f, dir * q0, State{eta0, 0.0}, dir * q_end, h0, tolerances(opts),
                             with_event ? &event : nullptr, &guard);
    out.seg.chart = CurveSegment::Chart::Eta;
    out.seg.q_from = q0;
    out.seg.q_to = dir * out.run.t_stop;
    out.seg.dense = std::make_shared<ode::DenseOutput>(std::move(out.run.dense));
    return out;
}

ChartRun run_tau(const Local& L, double tau0, double u0, double tau_end, double h0,
                 const ToleranceOptions& opts, bool with_event) {
    const ode::Rhs f = [&L](double tau, const State& y) -> State {
        const double x = -1.0 / tau;
        return {L.u_slope(x, y[0]), gap_integrand_tau(x, y[0])};
    };
    const ode::Scalar event = [](double, const State& y) { return y[0]; };
    const ode::Scalar guard = [&L](double tau, const State& y) {
        const double x = -1.0 / tau;
        return L.g.m(1.0 + x) + L.k * x * x * y[0];
    };
    ChartRun out;
    out.run = ode::integrate(f, tau0, State{u0, 0.0}, tau_end, h0, tolerances(opts),
                             with_event ? &event : nullptr, &guard);
    out.seg.chart = CurveSegment::Chart::Tau;
    out.seg.q_from = 1.0 - 1.0 / tau0;
    out.seg.q_to = 1.0 - 1.0 / out.run.t_stop;
    out.seg.dense = std::make_shared<ode::DenseOutput>(std::move(out.run.dense));
    return out;
}

double bridge_integral(double c2, double c3, double xa, double xb) {
    if (xa == xb) return 0.0;
    auto f = [c2, c3](double x) { return gap_integrand_local(x, c2 + c3 * x); };
    return boost::math::quadrature::gauss<double, 20>::integrate(f, xa, xb);
}

CurveSegment make_bridge(double c2, double c3, double xa, double xb) {
    CurveSegment s;
    s.chart = CurveSegment::Chart::Bridge;
    s.q_from = 1.0 + xa;
    s.q_to = 1.0 + xb;
    s.c2 = c2;
    s.c3 = c3;
    return s;
}

double segment_total(const CurveSegment& s) {
    switch (s.chart) {
        case CurveSegment::Chart::Bridge:
            return bridge_integral(s.c2, s.c3, s.q_from - 1.0, s.q_to - 1.0);
        default:
            return s.dense->empty() ? 0.0 : (*s.dense)(s.dense->t_end())[1];
    }
}

[[noreturn]] void step_failure(double r, double q) {
    std::ostringstream os;
    os << "curve from r=" << r << " could not be continued past q=" << q;
    throw WedgeError(ErrorKind::StepFailure, os.str(), q);
}

double initial_step(double r, const QuadraticGeometry& g) {
    double h = 1e-3;
    const double gap = std::abs(g.qM - r);
    if (gap > 0.0) h = std::min(h, 1e-2 * gap);
    if (r != 0.0) h = std::min(h, 1e-2 * std::abs(r));
    if (std::abs(1.0 - r) > 0.0) h = std::min(h, 1e-2 * std::abs(1.0 - r));
    return std::max(h, 1e-14);
}

double far_limit(const QuadraticGeometry& g, double r) {
    // The exit point never passes the mirror image 2 qM - r of the start
    // about the Merton point; leave generous room beyond it.
    const int dir = g.direction();
    if (dir > 0) {
        if (!g.crosses_one() && r < 1.0) return 1.0;
        return 2.0 * g.qM + 1.0;
    }
    return 3.0 * g.qM - 1.0;
}

double switch_width(const QuadraticGeometry& g, const ToleranceOptions& o) {
    return std::min(o.switch_width, 0.5 * (g.qM - 1.0));
}

double restart_offset(const QuadraticGeometry& g, const ToleranceOptions& o) {
    return std::min(o.x0, 0.5 * switch_width(g, o));
}

// Appends a finished chart run, accumulating the running integral.
void append(SolutionCurve& c, CurveSegment seg, double& acc) {
    seg.offset = acc;
    acc += segment_total(seg);
    c.segments.push_back(std::move(seg));
}

struct BranchBuild {
    std::vector<CurveSegment> segs;
    double zeta = 0.0;
    double integral = 0.0;
};

// Unique branch leaving q = 1: tau chart from 1 + x0 to 1 + x_sw, then eta.
BranchBuild build_branch(const QuadraticGeometry& g, const ToleranceOptions& opts,
                         const SingularExpansion& e) {
    const Local L(g);
    const double xsw = switch_width(g, opts);
    BranchBuild out;
    SolutionCurve scratch;
    const double u0 = e.c2 + e.c3 * e.x0;
    ChartRun t = run_tau(L, -1.0 / e.x0, u0, -1.0 / xsw, 1e-3, opts, true);
    if (t.run.reason == ode::Stop::StepFailure || t.run.reason == ode::Stop::Guard)
        step_failure(1.0, t.seg.q_to);
    append(scratch, t.seg, out.integral);
    if (t.run.reason == ode::Stop::Event) {
        out.zeta = t.seg.q_to;
    } else {
        const double eta0 = xsw * xsw * t.run.y_stop[0];
        ChartRun s = run_eta(L, 1, 1.0 + xsw, eta0, far_limit(g, 1.0 + xsw), 1e-4, opts, true);
        if (s.run.reason != ode::Stop::Event) step_failure(1.0, s.seg.q_to);
        append(scratch, s.seg, out.integral);
        out.zeta = s.seg.q_to;
    }
    out.segs = std::move(scratch.segments);
    return out;
}

}  // namespace

double ode_rhs(double q, double n, const QuadraticGeometry& g) {
    const double gap = g.ell(q) - n;
    const double scale = std::max({std::abs(n), std::abs(g.ell(q)), 1.0});
    if (q == 1.0 || std::abs(gap) <= 1e-14 * scale) {
        std::ostringstream os;
        os << "ell(q) - n vanishes at q=" << q;
        throw WedgeError(ErrorKind::SingularDenominator, os.str(), q);
    }
    return ((1.0 - g.R) / g.R) * (n / (1.0 - q)) * (g.m(q) - n) / gap;
}

double start_curvature(double r, const QuadraticGeometry& g) {
    const double mr = g.m(r);
    return ((1.0 - g.R) / g.R) * mr * g.dm(r) / ((1.0 - r) * (g.ell(r) - mr));
}

LaunchPoint start_expansion(double r, const QuadraticGeometry& g, std::optional<double> step) {
    if (std::abs(r - g.qM) <= 1e-14 * std::max(1.0, std::abs(g.qM)))
        throw WedgeError(ErrorKind::DegenerateStart, "start at the Merton point is degenerate", r);
    const double s = step.value_or(std::max(1e-6, 1e-4 * std::abs(g.qM - r)));
    if (s == 0.0) return {r, g.m(r)};
    return {r + g.direction() * s, g.m(r) + 0.5 * start_curvature(r, g) * s * s};
}

SingularExpansion singular_expansion(const QuadraticGeometry& g, double x0) {
    SingularExpansion e;
    const double C = 2.0 / (g.delta * g.delta * g.R);
    const double m1 = g.m(1.0);
    const double dm1 = g.dm(1.0);
    e.x0 = x0;
    e.A0 = C * m1;
    e.b0 = -dm1 / g.k;
    e.c2 = e.b0 / e.A0;
    const double b1 = -g.d2m() / g.k;
    e.c3 = e.c2 * (1.0 + e.c2) - (dm1 / m1) * e.c2 + (b1 - 2.0 * e.c2) / (C * m1);
    return e;
}

std::pair<LaunchPoint, SingularExpansion> continue_through_singularity(
    const QuadraticGeometry& g, const ToleranceOptions& opts) {
    if (!g.crosses_one())
        throw WedgeError(ErrorKind::NotSingularCase,
                         "curves do not cross q = 1 for these parameters");
    const double x0 = restart_offset(g, opts);
    const SingularExpansion e = singular_expansion(g, x0);
    const double q = 1.0 + x0;
    return {LaunchPoint{q, g.m(q) + g.k * e.c2 * x0 * x0}, e};
}

SingularBranch::SingularBranch(const QuadraticGeometry& g, const ToleranceOptions& opts) {
    auto [launch, e] = continue_through_singularity(g, opts);
    (void)launch;
    BranchBuild b = build_branch(g, opts, e);
    SingularExpansion half = singular_expansion(g, 0.5 * e.x0);
    BranchBuild bh = build_branch(g, opts, half);
    e.zeta_shift_half_x0 = std::abs(b.zeta - bh.zeta);
    expansion_ = e;
    tail_ = std::move(b.segs);
    zeta_ = b.zeta;
    tail_integral_ = b.integral;
}

CurveTracer::CurveTracer(const QuadraticGeometry& g, const ToleranceOptions& opts)
    : g_(g), opts_(opts) {
    if (g.crosses_one()) branch_ = std::make_shared<SingularBranch>(g, opts);
}

SolutionCurve CurveTracer::trace(double r) const {
    const QuadraticGeometry& g = g_;
    const Local L(g);
    SolutionCurve c;
    c.r = r;
    c.direction = g.direction();

    if (std::abs(r - g.qM) <= 1e-14 * std::max(1.0, std::abs(g.qM))) {
        c.zeta = r;
        c.end = CurveEnd::Degenerate;
        return c;
    }
    double acc = 0.0;

    auto finish_eta = [&](ChartRun&& s) {
        const bool vanished = s.run.reason == ode::Stop::StepFailure &&
                              L.n(c.direction * s.run.t_stop, s.run.y_stop[0]) < kZeroLevel;
        append(c, std::move(s.seg), acc);
        if (s.run.reason == ode::Stop::Guard || vanished) {
            c.end = CurveEnd::HitZero;
        } else if (s.run.reason != ode::Stop::Event) {
            step_failure(r, c.segments.back().q_to);
        }
        c.zeta = c.segments.back().q_to;
        c.carried_integral = acc;
    };

    const double h0 = initial_step(r, g);
    if (!branch_ || r >= 1.0 + switch_width(g, opts_)) {
        finish_eta(run_eta(L, c.direction, r, 0.0, far_limit(g, r), h0, opts_, true));
        return c;
    }

    const SingularExpansion& e = branch_->expansion();
    const double xsw = switch_width(g, opts_);
    const double x0 = e.x0;
    const double relax = 40.0 / e.A0;

    auto attach_branch = [&](double x_from) {
        append(c, make_bridge(e.c2, e.c3, x_from, x0), acc);
        for (CurveSegment s : branch_->tail()) {
            s.offset += acc;
            c.segments.push_back(std::move(s));
        }
        acc += branch_->tail_integral();
        c.zeta = branch_->zeta();
        c.carried_integral = acc;
    };

    if (r < 1.0) {
        double tau0 = 1.0 / (1.0 - r);
        double u0 = 0.0;
        if (r < 1.0 - xsw) {
            ChartRun s = run_eta(L, 1, r, 0.0, 1.0 - xsw, h0, opts_, false);
            if (s.run.reason != ode::Stop::End) {
                append(c, std::move(s.seg), acc);
                if (s.run.reason == ode::Stop::Guard) {
                    c.end = CurveEnd::HitZero;
                    c.zeta = c.segments.back().q_to;
                    c.carried_integral = acc;
                    return c;
                }
                step_failure(r, c.segments.back().q_to);
            }
            u0 = s.run.y_stop[0] / (xsw * xsw);
            tau0 = 1.0 / xsw;
            append(c, std::move(s.seg), acc);
        }
        const double tau_end = std::max(1.0 / x0, tau0 + relax);
        ChartRun t = run_tau(L, tau0, u0, tau_end, std::min(1e-2, 0.1 / e.A0), opts_, false);
        if (t.run.reason != ode::Stop::End) step_failure(r, t.seg.q_to);
        append(c, std::move(t.seg), acc);
        c.crossed_singularity = true;
        attach_branch(-1.0 / tau_end);
        return c;
    }
    if (r == 1.0) {
        c.crossed_singularity = true;
        attach_branch(0.0);
        return c;
    }

    // 1 < r < 1 + x_sw: start in the local chart.
    const double tau_r = -1.0 / (r - 1.0);
    if (tau_r + relax < -1.0 / x0) {
        // Relaxes onto the branch through q = 1 long before q = 1 + x0.
        ChartRun t = run_tau(L, tau_r, 0.0, tau_r + relax, std::min(1e-2, 0.1 / e.A0), opts_, true);
        if (t.run.reason != ode::Stop::End) step_failure(r, t.seg.q_to);
        append(c, std::move(t.seg), acc);
        attach_branch(-1.0 / (tau_r + relax));
        return c;
    }
    ChartRun t = run_tau(L, tau_r, 0.0, -1.0 / xsw, std::min(1e-2, 0.1 / e.A0), opts_, true);
    if (t.run.reason == ode::Stop::Event || t.run.reason == ode::Stop::Guard) {
        const bool hit = t.run.reason == ode::Stop::Guard;
        append(c, std::move(t.seg), acc);
        c.end = hit ? CurveEnd::HitZero : CurveEnd::ReachedM;
        c.zeta = c.segments.back().q_to;
        c.carried_integral = acc;
        return c;
    }
    if (t.run.reason != ode::Stop::End) step_failure(r, t.seg.q_to);
    const double eta0 = xsw * xsw * t.run.y_stop[0];
    append(c, std::move(t.seg), acc);
    finish_eta(run_eta(L, 1, 1.0 + xsw, eta0, far_limit(g, 1.0 + xsw), 1e-4, opts_, true));
    return c;
}

SolutionCurve trace_curve(double r, const QuadraticGeometry& g, const ToleranceOptions& opts) {
    return CurveTracer(g, opts).trace(r);
}

SolutionCurve integrate_curve(double r, const QuadraticGeometry& g,
                              const ToleranceOptions& opts) {
    SolutionCurve c = trace_curve(r, g, opts);
    if (c.end == CurveEnd::HitZero) {
        std::ostringstream os;
        os << "curve from r=" << r << " reached n=0 at q=" << c.zeta;
        throw WedgeError(ErrorKind::HitZero, os.str(), c.zeta);
    }
    return c;
}

double zeta(double r, const QuadraticGeometry& g, const ToleranceOptions& opts) {
    return integrate_curve(r, g, opts).zeta;
}

SolutionCurve::Local SolutionCurve::eval(double q) const {
    if (segments.empty()) return {};
    const double key = direction * q;
    const CurveSegment* seg = &segments.back();
    for (const auto& s : segments) {
        if (key <= direction * s.q_to) {
            seg = &s;
            break;
        }
    }
    switch (seg->chart) {
        case CurveSegment::Chart::Eta: {
            const State y = (*seg->dense)(direction * q);
            const double d = 1.0 - q;
            return {y[0], y[0] / (d * d), seg->offset + y[1]};
        }
        case CurveSegment::Chart::Tau: {
            const double x = q - 1.0;
            if (x == 0.0) {
                const State y = (*seg->dense)(seg->dense->t_end());
                return {0.0, y[0], seg->offset + y[1]};
            }
            const State y = (*seg->dense)(-1.0 / x);
            return {x * x * y[0], y[0], seg->offset + y[1]};
        }
        case CurveSegment::Chart::Bridge: {
            const double x = std::clamp(q - 1.0, seg->q_from - 1.0, seg->q_to - 1.0);
            const double u = seg->c2 + seg->c3 * x;
            return {x * x * u, u,
                    seg->offset + bridge_integral(seg->c2, seg->c3, seg->q_from - 1.0, x)};
        }
    }
    return {};
}

double SolutionCurve::eta(double q) const { return eval(q).eta; }
double SolutionCurve::scaled_eta(double q) const { return eval(q).scaled; }
double SolutionCurve::integral_to(double q) const { return eval(q).integral; }
double SolutionCurve::n(double q, const QuadraticGeometry& g) const {
    return g.m(q) + g.k * eta(q);
}

std::vector<double> SolutionCurve::nodes() const {
    std::vector<double> out;
    for (const auto& s : segments) {
        switch (s.chart) {
            case CurveSegment::Chart::Eta:
                for (const auto& st : s.dense->steps()) out.push_back(direction * st.t0);
                break;
            case CurveSegment::Chart::Tau:
                for (const auto& st : s.dense->steps()) out.push_back(1.0 - 1.0 / st.t0);
                break;
            case CurveSegment::Chart::Bridge:
                out.push_back(s.q_from);
                break;
        }
    }
    out.push_back(zeta);
    return out;
}

}  // namespace wedge
