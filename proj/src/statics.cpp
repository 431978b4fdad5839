#include "wedge/statics.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "wedge/errors.hpp"
#include "wedge/parallel.hpp"

namespace wedge {

std::string to_string(PointStatus s) {
    switch (s) {
        case PointStatus::Ok: return "ok";
        case PointStatus::IllPosedForXi: return "ill_posed_for_xi";
        case PointStatus::IllPosedAlways: return "ill_posed_always";
        case PointStatus::Boundary: return "boundary";
        case PointStatus::Failed: return "failed";
    }
    return "?";
}

std::string to_string(Monotonicity::Verdict v) {
    switch (v) {
        case Monotonicity::Verdict::Monotone: return "monotone";
        case Monotonicity::Verdict::Violated: return "violated";
        case Monotonicity::Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

std::pair<double, double> split_cost(double xi, double lambda_ref, double gamma_ref) {
    if (!(lambda_ref + gamma_ref > 0.0)) return {xi, 0.0};
    const double t = xi / (lambda_ref + gamma_ref + gamma_ref * xi);
    return {lambda_ref * t, gamma_ref * t};
}

namespace {

PointStatus status_of(ErrorKind k) {
    switch (k) {
        case ErrorKind::IllPosedForThisXi: return PointStatus::IllPosedForXi;
        case ErrorKind::IllPosedAlways: return PointStatus::IllPosedAlways;
        case ErrorKind::BoundaryCase: return PointStatus::Boundary;
        default: return PointStatus::Failed;
    }
}

void fill(SweepRow& row, const WedgeSolution& w) {
    const double lam = row.lambda, gam = row.gamma;
    row.q_star = w.q_star;
    row.q_upper = w.q_upper;
    row.p_star = w.q_star / (1.0 + lam - lam * w.q_star);
    row.p_upper = w.q_upper / (1.0 - gam + gam * w.q_upper);
    row.z_star = w.q_star / ((1.0 + lam) * (1.0 - w.q_star));
    row.z_upper = w.q_upper / ((1.0 - gam) * (1.0 - w.q_upper));
    row.lambda_value = w.lambda_value;
    row.regime = w.regime;
}

void mark(SweepRow& row, const WedgeError& e) {
    row.status = status_of(e.kind());
    row.message = e.what();
}

}  // namespace

SweepResult sweep_xi(const DimensionlessParams& base, std::span<const double> xi_grid) {
    SweepResult out;
    out.axis = "xi";
    out.grid.assign(xi_grid.begin(), xi_grid.end());
    out.rows.resize(out.grid.size());

    const QuadraticGeometry g = geometry(base);
    const CaseLabel label = classify(g);
    if (label.is_boundary()) {
        for (std::size_t i = 0; i < out.rows.size(); ++i) {
            out.rows[i].value = out.grid[i];
            out.rows[i].status = PointStatus::Boundary;
            out.rows[i].case_name = label.name();
            out.rows[i].message = "parameters lie on an excluded case boundary";
        }
        return out;
    }
    const BoundarySolver solver(g);
    out.thresholds = solver.thresholds();

    parallel_for(out.grid.size(), [&](std::size_t i) {
        SweepRow& row = out.rows[i];
        row.value = out.grid[i];
        row.case_name = label.name();
        row.wellposedness = solver.wellposed().kind;
        std::tie(row.lambda, row.gamma) =
            split_cost(row.value, base.original.lambda, base.original.gamma);
        try {
            fill(row, solver.solve(row.value));
        } catch (const WedgeError& e) {
            mark(row, e);
        }
    });
    return out;
}

SweepResult sweep_drift(const DimensionlessParams& base, std::span<const double> eps_grid) {
    SweepResult out;
    out.axis = "eps";
    out.grid.assign(eps_grid.begin(), eps_grid.end());
    out.rows.resize(out.grid.size());

    parallel_for(out.grid.size(), [&](std::size_t i) {
        SweepRow& row = out.rows[i];
        row.value = out.grid[i];
        row.lambda = base.original.lambda;
        row.gamma = base.original.gamma;
        try {
            MarketParams m = base.original;
            m.mu = row.value * m.beta;
            const DimensionlessParams d = reduce_params(m);
            const QuadraticGeometry g = geometry(d);
            const CaseLabel label = classify(g);
            row.case_name = label.name();
            if (label.is_boundary()) {
                row.status = PointStatus::Boundary;
                row.message = "parameters lie on an excluded case boundary";
                return;
            }
            const BoundarySolver solver(g);
            row.wellposedness = solver.wellposed().kind;
            fill(row, solver.solve(d.xi));
        } catch (const WedgeError& e) {
            mark(row, e);
        }
    });
    return out;
}

Monotonicity check_monotone(std::span<const double> v, Trend trend, double tol) {
    const double sign = (trend == Trend::NonDecreasing || trend == Trend::Increasing) ? 1.0 : -1.0;
    const bool strict = trend == Trend::Increasing || trend == Trend::Decreasing;
    Monotonicity m;
    std::optional<std::size_t> tie;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const double d = sign * (v[i + 1] - v[i]);
        if (d < -tol) {
            m.verdict = Monotonicity::Verdict::Violated;
            m.index = i;
            return m;
        }
        const bool inconclusive = strict ? d <= tol : d < 0.0;
        if (inconclusive && !tie) tie = i;
    }
    if (tie) {
        m.verdict = Monotonicity::Verdict::Inconclusive;
        m.index = tie;
    }
    return m;
}

Monotonicity check_monotone(const SweepResult& r, double SweepRow::*column, Trend trend,
                            double tol) {
    std::vector<double> v;
    for (const auto& row : r.rows)
        if (row.status == PointStatus::Ok) v.push_back(row.*column);
    return check_monotone(v, trend, tol);
}

bool BoundsReport::all_hold() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const BoundCheck& c) { return !c.applicable || c.holds; });
}

std::size_t BoundsReport::applicable_count() const {
    return static_cast<std::size_t>(
        std::count_if(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.applicable; }));
}

BoundsReport check_bounds(const WedgeSolution& sol, const PolicySpec& spec,
                          const DimensionlessParams& d) {
    const double eps = d.eps, dR = d.delta * d.delta * d.R;
    const double lam = spec.lambda, gam = spec.gamma;
    const double qM = eps / dR;
    const double ps = spec.p_star, pu = spec.p_upper;
    BoundsReport rep;

    auto upper = [&](std::string name, bool applicable, double lhs, double rhs) {
        rep.checks.push_back({std::move(name), applicable, applicable && lhs < rhs, lhs, rhs, rhs - lhs});
    };
    auto lower = [&](std::string name, bool applicable, double lhs, double rhs) {
        rep.checks.push_back({std::move(name), applicable, applicable && lhs > rhs, lhs, rhs, lhs - rhs});
    };

    const bool pos = eps > 0.0;
    upper("sale_upper", pos, pu, eps / (0.5 * (1.0 - gam) * dR + gam * eps));
    lower("sale_lower", pos, pu, eps / ((1.0 - gam) * dR + gam * eps));

    const bool pdu = pos && (lam == 0.0 || eps < dR * (1.0 + lam) / lam);
    {
        const double rhs = eps / ((1.0 + lam) * dR - lam * eps);
        BoundCheck c{"purchase_upper", pdu, false, ps, rhs, std::min(rhs - ps, ps)};
        c.holds = pdu && ps > 0.0 && ps < rhs;
        rep.checks.push_back(c);
    }
    upper("sale_refined", pos && qM > 1.0, pu,
          (2.0 * eps - dR) / ((1.0 - 2.0 * gam) * dR + 2.0 * gam * eps));
    upper("sale_fraction", pos && qM < 1.0, sol.q_upper, std::min(2.0 * qM, 1.0));
    lower("merton_inside", pos && gam == 0.0 && qM > 1.0, pu, qM);
    return rep;
}

}  // namespace wedge
