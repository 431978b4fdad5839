#include "wedge/dopri.hpp"

#include <algorithm>
#include <cmath>

namespace wedge::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett & Wanner).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr std::size_t N = 2;

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
    State out = y;
    for (std::size_t i = 0; i < N; ++i) {
        double s = 0.0;
        for (const auto& [a, k] : terms) s += a * (*k)[i];
        out[i] += h * s;
    }
    return out;
}

bool finite(const State& s) { return std::isfinite(s[0]) && std::isfinite(s[1]); }

double locate(const Scalar& fn, const DenseStep& step, double lo, double hi, double tol) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (fn(mid, step.eval(mid)) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

State DenseStep::eval(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    State y;
    for (std::size_t i = 0; i < N; ++i)
        y[i] = c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])));
    return y;
}

State DenseStep::deriv(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    State d;
    for (std::size_t i = 0; i < N; ++i) {
        const double C = c[3][i] + th1 * c[4][i];
        const double dC = -c[4][i];
        const double B = c[2][i] + th * C;
        const double dB = C + th * dC;
        const double A = c[1][i] + th1 * B;
        const double dA = -B + th1 * dB;
        d[i] = (A + th * dA) / h;
    }
    return d;
}

State DenseOutput::operator()(double t) const {
    t = std::clamp(t, t_begin(), t_end_);
    auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                               [](double v, const DenseStep& s) { return v < s.t0; });
    if (it != steps_.begin()) --it;
    return it->eval(t);
}

Run integrate(const Rhs& f, double t0, const State& y0, double t_end, double h0,
              const Tolerances& tol, const Scalar* event, const Scalar* guard) {
    Run run;
    double t = t0;
    State y = y0;
    State k1 = f(t, y);
    double h = std::min(h0, t_end - t0);
    const double span = t_end - t0;

    while (t < t_end) {
        if (run.accepted + run.rejected >= tol.max_steps) {
            run.reason = Stop::StepFailure;
            break;
        }
        const bool last = t + h >= t_end;
        if (last) {
            h = t_end - t;
        } else if (h <= 1e-15 * std::abs(t) || h < 1e-290) {
            run.reason = Stop::StepFailure;
            break;
        }

        const State k2 = f(t + c2 * h, axpy(y, h, {{a21, &k1}}));
        const State k3 = f(t + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
        const State k4 = f(t + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const State k5 =
            f(t + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const State k6 = f(t + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4},
                                             {a65, &k5}}));
        const State y1 = axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
        const double t1 = last ? t_end : t + h;
        const State k7 = f(t1, y1);

        double err = 0.0;
        bool ok = finite(k2) && finite(k3) && finite(k4) && finite(k5) && finite(k6) &&
                  finite(y1) && finite(k7);
        if (ok) {
            for (std::size_t i = 0; i < N; ++i) {
                const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                      e6 * k6[i] + e7 * k7[i]);
                const double sc = tol.atol + tol.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
                err += (e / sc) * (e / sc);
            }
            err = std::sqrt(err / N);
            ok = std::isfinite(err);
        }
        if (!ok) {
            ++run.rejected;
            h *= 0.1;
            continue;
        }
        if (err > 1.0) {
            ++run.rejected;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }

        DenseStep step;
        step.t0 = t;
        step.h = t1 - t;
        for (std::size_t i = 0; i < N; ++i) {
            const double dy = y1[i] - y[i];
            const double bspl = step.h * k1[i] - dy;
            step.c[0][i] = y[i];
            step.c[1][i] = dy;
            step.c[2][i] = bspl;
            step.c[3][i] = dy - step.h * k7[i] - bspl;
            step.c[4][i] = step.h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                     d6 * k6[i] + d7 * k7[i]);
        }
        run.dense.push(step);
        ++run.accepted;

        double t_hit = t1;
        Stop hit = Stop::End;
        if (event && (*event)(t, y) > 0.0 && (*event)(t1, y1) <= 0.0) {
            t_hit = locate(*event, step, t, t1, tol.event_tol);
            hit = Stop::Event;
        }
        if (guard && (*guard)(t, y) > 0.0 && (*guard)(t1, y1) <= 0.0) {
            const double tg = locate(*guard, step, t, t1, tol.event_tol);
            if (hit == Stop::End || tg < t_hit) {
                t_hit = tg;
                hit = Stop::Guard;
            }
        }
        if (hit != Stop::End) {
            run.reason = hit;
            run.t_stop = t_hit;
            run.y_stop = step.eval(t_hit);
            run.dense.truncate(t_hit);
            return run;
        }

        t = t1;
        y = y1;
        k1 = k7;
        double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h = std::min(h * fac, span);
    }
    if (run.reason != Stop::StepFailure) run.reason = Stop::End;
    run.t_stop = t;
    run.y_stop = y;
    run.dense.truncate(t);
    return run;
}

}  // namespace wedge::ode
