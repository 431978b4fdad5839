#pragma once

#include <optional>
#include <string>

#include "wedge/curve.hpp"
#include "wedge/params.hpp"

namespace wedge {

enum class Regime { Interior, CrossesSingularity, AtSingularIVP };

std::string to_string(Regime r);

struct Thresholds {
    std::optional<double> xi_under;  ///< below this the problem is ill-posed
    std::optional<double> xi_bar;    ///< above this the wedge straddles q = 1
};

struct WedgeSolution {
    double q_star = 0.0;   ///< purchase-side boundary (lower q)
    double q_upper = 0.0;  ///< sale-side boundary (upper q)
    double lambda_value = 0.0;
    double r = 0.0;  ///< start abscissa of the selected curve
    SolutionCurve curve;
    Regime regime = Regime::Interior;
    Thresholds thresholds;
    int iterations = 0;
};

/// Boundary functional of a traced curve: the integral of
/// eta/(s(s - eta)), s = q(1-q), between its endpoints, by adaptive
/// Gauss-Kronrod on the dense output. Throws IllPosedCurve on HitZero.
double lambda_of(const SolutionCurve& c);
double lambda_of(double r, const QuadraticGeometry& g, const ToleranceOptions& opts = {});

/// Closed form of the limiting functional at the lower root of m.
/// Throws RootsNotReal or OrderingUnsupported.
double closed_form_lambda_under(const QuadraticGeometry& g);

/// Functional of the branch through q = 1. Throws NotSingularCase.
double lambda_at_singular(const QuadraticGeometry& g, const ToleranceOptions& opts = {});

/// Bisection solver bound to one (eps, delta, R); caches thresholds and the
/// singular branch so repeated solves for different xi are cheap.
class BoundarySolver {
public:
    explicit BoundarySolver(const QuadraticGeometry& g, const ToleranceOptions& opts = {});

    [[nodiscard]] double lambda(double r) const;
    [[nodiscard]] WedgeSolution solve(double xi) const;

    [[nodiscard]] const QuadraticGeometry& geometry() const { return tracer_.geometry(); }
    [[nodiscard]] const CurveTracer& tracer() const { return tracer_; }
    [[nodiscard]] const CaseLabel& label() const { return label_; }
    [[nodiscard]] const WellPosedness& wellposed() const { return wp_; }
    [[nodiscard]] const Thresholds& thresholds() const { return thresholds_; }
    /// Right end of the start bracket for eps > 0, left end for eps < 0.
    [[nodiscard]] double bracket_limit() const { return limit_; }

private:
    CurveTracer tracer_;
    CaseLabel label_;
    WellPosedness wp_;
    Thresholds thresholds_;
    std::optional<double> lambda_one_;
    double limit_ = 0.0;
};

WedgeSolution solve_boundaries(const DimensionlessParams& d, const ToleranceOptions& opts = {});

}  // namespace wedge
