#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wedge/boundary.hpp"
#include "wedge/params.hpp"

namespace wedge {

enum class Action { Buy, Sell, NoTrade };

std::string to_string(Action a);

/// One sample of the value function inside the wedge. p is the risky
/// fraction of paper wealth x + y theta; derivatives are with respect to p.
struct PolicyNode {
    double q = 0.0;
    double p = 0.0;
    double n = 0.0;
    double G = 0.0;
    double dG = 0.0;
    double d2G = 0.0;
    /// C / (x + y theta) in units of beta / R, equal to n / (1 - q + q e^phi).
    double consumption = 0.0;
};

/// Boundary-region curvatures; the inner and outer values agree unless the
/// wedge starts on the singular point.
struct CurvatureMatch {
    double inner_lower = 0.0, outer_lower = 0.0;
    double inner_upper = 0.0, outer_upper = 0.0;
};

/// Value function and trading rule for one solved wedge.
///
/// The scaled value is V = W^{1-R}/(1-R) (R/beta)^R G(p) with W = x + y theta
/// and p = y theta / W. Inside [p_star, p_upper] G is tabulated on Chebyshev
/// nodes in q and interpolated by cubic Hermite segments in p; outside it has
/// the closed forms fixed by value matching at the nearer boundary.
class PolicySpec {
public:
    double q_star = 0.0, q_upper = 0.0;
    double z_star = 0.0, z_upper = 0.0;
    double p_star = 0.0, p_upper = 0.0;
    double A_star = 0.0, A_upper = 0.0;  ///< n^{-R} at the two boundaries
    double lambda = 0.0, gamma = 0.0;
    double R = 0.5, beta = 1.0;
    Regime regime = Regime::Interior;

    /// Ascending in p, first node at p_star and last at p_upper.
    std::vector<PolicyNode> table;

    [[nodiscard]] double G(double p) const;
    [[nodiscard]] double dG(double p) const;
    /// G - p G'/(1-R); positive wherever consumption is defined.
    [[nodiscard]] double consumption_base(double p) const;
    /// Optimal C / W: (beta/R) (G - p G'/(1-R))^{-1/R}.
    [[nodiscard]] double consumption_rate(double p) const;
    [[nodiscard]] Action action(double p) const;

    /// Exact evaluation at an abscissa of the underlying curve.
    [[nodiscard]] PolicyNode at_q(double q) const;
    [[nodiscard]] CurvatureMatch curvature_match() const;

    /// e^{-beta t}; the tabulated value is for t = 0.
    [[nodiscard]] double discount(double t) const;

    [[nodiscard]] const WedgeSolution& solution() const { return solution_; }
    [[nodiscard]] const QuadraticGeometry& geometry() const { return geometry_; }

private:
    friend PolicySpec build_policy(const WedgeSolution&, const DimensionlessParams&,
                                   std::size_t);
    [[nodiscard]] std::size_t segment(double p) const;

    WedgeSolution solution_;
    QuadraticGeometry geometry_;
    double phi_offset_ = 0.0;
};

struct ValuePoint {
    double x = 0.0;
    double y_theta = 0.0;
    double V = 0.0;
    double C = 0.0;
    Action action = Action::NoTrade;
};

PolicySpec build_policy(const WedgeSolution& w, const DimensionlessParams& d,
                        std::size_t nodes = 2048);

/// Throws WedgeError(Insolvent) unless x + (1-gamma)(y)^+ - (1+lambda)(y)^- > 0.
ValuePoint value_at(const PolicySpec& spec, double x, double y_theta);

bool solvent(double x, double y_theta, double lambda, double gamma);

struct MertonReference {
    double q_M = 0.0;
    double coefficient = 0.0;  ///< m_M^{-R}
};

/// Throws MertonIllPosed when m_M <= 0.
MertonReference merton_reference(const DimensionlessParams& d);

}  // namespace wedge
