#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "wedge/dopri.hpp"
#include "wedge/params.hpp"

namespace wedge {

struct ToleranceOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double event_tol = 1e-12;
    double x0 = 1e-4;            ///< restart offset past the singular point q = 1
    double switch_width = 0.05;  ///< |q - 1| below which the local chart is used
};

/// Leading behaviour of eta = (n - m)/k near q = 1 + x in the crossing case:
/// eta(x) ~ c2 x^2 + c3 x^3.
struct SingularExpansion {
    double c2 = 0.0;
    double c3 = 0.0;
    double x0 = 0.0;
    double A0 = 0.0;  ///< relaxation rate a(0, 0)
    double b0 = 0.0;  ///< forcing b(0)
    /// Richardson check: |zeta(1) with x0| - |zeta(1) with x0/2|.
    std::optional<double> zeta_shift_half_x0;
};

/// The state along a curve is eta = (n - m)/k with k = (delta^2/2)(1-R).
/// Three charts cover the domain: eta in q, u = eta/x^2 in tau = -1/x near
/// q = 1 + x, and a short analytic bridge straddling q = 1.
struct CurveSegment {
    enum class Chart { Eta, Tau, Bridge };
    Chart chart = Chart::Eta;
    double q_from = 0.0;  ///< first abscissa in travel order
    double q_to = 0.0;    ///< last abscissa in travel order
    double offset = 0.0;  ///< running integral accumulated before this segment
    std::shared_ptr<const ode::DenseOutput> dense;  ///< Eta and Tau charts
    double c2 = 0.0, c3 = 0.0;                      ///< Bridge chart
};

enum class CurveEnd { ReachedM, HitZero, Degenerate };

class SolutionCurve {
public:
    double r = 0.0;
    double zeta = 0.0;
    int direction = 1;  ///< +1 rightward, -1 leftward
    bool crossed_singularity = false;
    CurveEnd end = CurveEnd::ReachedM;
    std::vector<CurveSegment> segments;

    /// Running integral of eta/(s(s - eta)), s = q(1-q), from r to zeta as
    /// carried by the integrator.
    double carried_integral = 0.0;

    /// Normalised gap eta(q) for q between r and zeta.
    [[nodiscard]] double eta(double q) const;
    /// eta/(1-q)^2, finite through q = 1.
    [[nodiscard]] double scaled_eta(double q) const;
    /// Running integral from r to q along the direction of travel.
    [[nodiscard]] double integral_to(double q) const;
    [[nodiscard]] double n(double q, const QuadraticGeometry& g) const;

    /// Abscissae of the accepted steps, in travel order, ending at zeta.
    [[nodiscard]] std::vector<double> nodes() const;

private:
    struct Local {
        double eta = 0.0;
        double scaled = 0.0;
        double integral = 0.0;
    };
    [[nodiscard]] Local eval(double q) const;
};

/// n' = ((1-R)/R) (n/(1-q)) (m-n)/(ell-n). Throws SingularDenominator near a
/// vanishing ell - n away from q = 1.
double ode_rhs(double q, double n, const QuadraticGeometry& g);

/// n''(r) at a free-boundary start n(r) = m(r), n'(r) = 0.
double start_curvature(double r, const QuadraticGeometry& g);

struct LaunchPoint {
    double q = 0.0;
    double n = 0.0;
};

/// Second-order Taylor launch from (r, m(r)). The step defaults to
/// max(1e-6, 1e-4 |qM - r|) in the direction of travel.
LaunchPoint start_expansion(double r, const QuadraticGeometry& g,
                            std::optional<double> step = std::nullopt);

/// Traces n_r without throwing on HitZero; the end state is recorded instead.
SolutionCurve trace_curve(double r, const QuadraticGeometry& g, const ToleranceOptions& opts = {});

/// As trace_curve but throws WedgeError(HitZero) carrying the abscissa.
SolutionCurve integrate_curve(double r, const QuadraticGeometry& g,
                              const ToleranceOptions& opts = {});

SingularExpansion singular_expansion(const QuadraticGeometry& g, double x0);

/// Restart point just past q = 1 on the unique branch through (1, m(1)).
std::pair<LaunchPoint, SingularExpansion> continue_through_singularity(
    const QuadraticGeometry& g, const ToleranceOptions& opts = {});

double zeta(double r, const QuadraticGeometry& g, const ToleranceOptions& opts = {});

/// Precomputed branch from q = 1 + x0 to zeta(1), shared by every curve that
/// crosses the singular point.
class SingularBranch {
public:
    SingularBranch(const QuadraticGeometry& g, const ToleranceOptions& opts);

    [[nodiscard]] const SingularExpansion& expansion() const { return expansion_; }
    [[nodiscard]] double zeta() const { return zeta_; }
    /// Segments from 1 + x0 onward with offsets relative to 1 + x0.
    [[nodiscard]] const std::vector<CurveSegment>& tail() const { return tail_; }
    [[nodiscard]] double tail_integral() const { return tail_integral_; }

private:
    SingularExpansion expansion_;
    std::vector<CurveSegment> tail_;
    double zeta_ = 0.0;
    double tail_integral_ = 0.0;
};

/// Curve tracer bound to one geometry; caches the singular branch.
class CurveTracer {
public:
    explicit CurveTracer(const QuadraticGeometry& g, const ToleranceOptions& opts = {});

    [[nodiscard]] SolutionCurve trace(double r) const;
    [[nodiscard]] const QuadraticGeometry& geometry() const { return g_; }
    [[nodiscard]] const ToleranceOptions& options() const { return opts_; }
    /// Null unless the geometry crosses q = 1.
    [[nodiscard]] const SingularBranch* branch() const { return branch_.get(); }

private:
    QuadraticGeometry g_;
    ToleranceOptions opts_;
    std::shared_ptr<const SingularBranch> branch_;
};

/// Integrand of the boundary functional in the eta variable.
inline double gap_integrand(double q, double eta) {
    const double s = q * (1.0 - q);
    return eta / (s * (s - eta));
}

/// Integrand in the local chart near q = 1 + x with eta = x^2 u, per unit tau.
inline double gap_integrand_tau(double x, double u) {
    return x * x * u / ((1.0 + x) * (1.0 + x + x * u));
}

/// Same integrand per unit x, used on the bridge.
inline double gap_integrand_local(double x, double u) {
    return u / ((1.0 + x) * (1.0 + x + x * u));
}

}  // namespace wedge
