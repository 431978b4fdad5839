#pragma once

#include <optional>
#include <string>
#include <utility>

namespace wedge {

/// Market inputs in natural units.
struct MarketParams {
    double mu = 0.0;      ///< drift per unit time
    double sigma = 1.0;   ///< volatility per sqrt(time)
    double beta = 1.0;    ///< discount rate
    double R = 0.5;       ///< relative risk aversion, R > 0, R != 1
    double lambda = 0.0;  ///< proportional cost on purchases
    double gamma = 0.0;   ///< proportional cost on sales, in [0, 1)
};

struct DimensionlessParams {
    double eps = 0.0;    ///< mu / beta
    double delta = 1.0;  ///< sigma / sqrt(beta)
    double R = 0.5;
    double xi = 0.0;     ///< round-trip cost (lambda + gamma) / (1 - gamma)
    MarketParams original;
};

/// Validates and reduces. Throws WedgeError(InvalidParams) listing every
/// violated field.
DimensionlessParams reduce_params(const MarketParams& p);

/// Convenience: builds MarketParams with beta = 1 so that mu = eps and
/// sigma = delta, then reduces.
DimensionlessParams make_params(double eps, double delta, double R,
                                double lambda, double gamma);

/// m(q) = 1 - eps(1-R) q + (delta^2/2) R (1-R) q^2 and
/// ell(q) = m(q) + k q (1-q) with k = (delta^2/2)(1-R).
struct QuadraticGeometry {
    double eps = 0.0;
    double delta = 1.0;
    double R = 0.5;

    double k = 0.0;   ///< (delta^2/2)(1-R), the ell - m spread coefficient
    double m1 = 0.0;  ///< linear coefficient of m
    double m2 = 0.0;  ///< quadratic coefficient of m
    double l1 = 0.0;  ///< linear coefficient of ell
    double l2 = 0.0;  ///< quadratic coefficient of ell

    double qM = 0.0;  ///< turning point of m (Merton fraction)
    double mM = 0.0;  ///< m(qM)

    std::optional<std::pair<double, double>> q_roots;  ///< roots of m, ascending
    std::optional<std::pair<double, double>> p_roots;  ///< roots of ell, ascending

    [[nodiscard]] double m(double q) const { return 1.0 + q * (m1 + q * m2); }
    [[nodiscard]] double dm(double q) const { return m1 + 2.0 * m2 * q; }
    [[nodiscard]] double d2m() const { return 2.0 * m2; }
    [[nodiscard]] double ell(double q) const { return 1.0 + q * (l1 + q * l2); }

    /// True when the candidate curves pass through the singular point q = 1.
    [[nodiscard]] bool crosses_one() const;
    /// +1 when curves run rightward (eps > 0), -1 when leftward.
    [[nodiscard]] int direction() const { return eps > 0.0 ? 1 : -1; }
};

QuadraticGeometry geometry(double eps, double delta, double R);
QuadraticGeometry geometry(const DimensionlessParams& d);

/// Real roots of a q^2 + b q + c, ascending, computed without cancellation.
std::optional<std::pair<double, double>> quadratic_roots(double a, double b, double c);

enum class CaseId { C1AbIIii, C1Aa, C1AbIIi, C2AII, C1AbIii, C1AbIi, C2AI, C1Bii, C1Bi, C2B };

/// Which excluded equality put the parameters on a case boundary.
enum class BoundaryKind {
    SlopeAtZero,    ///< m'(0) = 0, eps = 0
    LevelAtOne,     ///< m(1) = 0, eps = 1/(1-R) + delta^2 R / 2
    SlopeAtOne,     ///< m'(1) = 0, eps = delta^2 R
    MertonLevel,    ///< m(qM) = 0, |eps| = delta sqrt(2R/(1-R))
};

struct CaseLabel {
    std::optional<CaseId> id;
    std::optional<BoundaryKind> boundary;

    [[nodiscard]] bool is_boundary() const { return boundary.has_value(); }
    [[nodiscard]] std::string name() const;
};

std::string to_string(CaseId id);
std::string to_string(BoundaryKind b);

/// Sign tests on R-1, m'(0), m(1), m'(1), mM.
CaseLabel classify(const QuadraticGeometry& g);
CaseLabel classify(const DimensionlessParams& d);

/// Same table written as explicit eps ranges. Kept separate so the two
/// formulations can be checked against each other.
CaseLabel classify_by_eps_range(double eps, double delta, double R);

struct WellPosedness {
    enum class Kind { Unconditional, Conditional, IllPosed };
    Kind kind = Kind::Unconditional;
    double xi_threshold = 0.0;  ///< only meaningful for Conditional
};

std::string to_string(WellPosedness::Kind k);

/// Throws WedgeError(BoundaryCase) on excluded equalities.
WellPosedness wellposedness(const QuadraticGeometry& g);
WellPosedness wellposedness(const DimensionlessParams& d);

/// delta sqrt(2R/(1-R)); only defined for R < 1.
double merton_level_eps(double delta, double R);
/// 1/(1-R) + delta^2 R / 2.
double level_at_one_eps(double delta, double R);

}  // namespace wedge
