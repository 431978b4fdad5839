#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wedge/boundary.hpp"
#include "wedge/params.hpp"
#include "wedge/policy.hpp"

namespace wedge {

enum class PointStatus { Ok, IllPosedForXi, IllPosedAlways, Boundary, Failed };

std::string to_string(PointStatus s);

struct SweepRow {
    double value = 0.0;  ///< grid coordinate
    PointStatus status = PointStatus::Ok;
    std::string case_name;
    std::string message;  ///< empty when status is Ok
    double lambda = 0.0, gamma = 0.0;
    double q_star = 0.0, q_upper = 0.0;
    double p_star = 0.0, p_upper = 0.0;
    double z_star = 0.0, z_upper = 0.0;
    double lambda_value = 0.0;
    Regime regime = Regime::Interior;
    std::optional<WellPosedness::Kind> wellposedness;
};

struct SweepResult {
    std::string axis;
    std::vector<double> grid;
    std::vector<SweepRow> rows;  ///< rows[i] belongs to grid[i]
    Thresholds thresholds;       ///< filled by sweep_xi
};

/// Splits a round-trip cost xi into (lambda, gamma) along the direction of a
/// reference pair, so that (lambda + gamma)/(1 - gamma) = xi. A zero
/// reference puts the whole cost on purchases.
std::pair<double, double> split_cost(double xi, double lambda_ref, double gamma_ref);

/// Re-solves the boundaries for each xi with (eps, delta, R) fixed; one
/// solver and its cached singular branch serve the whole grid.
SweepResult sweep_xi(const DimensionlessParams& base, std::span<const double> xi_grid);

/// Re-solves for each eps with (delta, R, lambda, gamma) taken from base.
SweepResult sweep_drift(const DimensionlessParams& base, std::span<const double> eps_grid);

enum class Trend { NonDecreasing, NonIncreasing, Increasing, Decreasing };

struct Monotonicity {
    enum class Verdict { Monotone, Violated, Inconclusive };
    Verdict verdict = Verdict::Monotone;
    std::optional<std::size_t> index;  ///< first offending pair (i, i+1)
};

std::string to_string(Monotonicity::Verdict v);

/// Checks consecutive values against the trend with tie tolerance tol.
/// Non-strict trends: a step against the trend within tol is inconclusive.
/// Strict trends: a step of size at most tol either way is inconclusive.
Monotonicity check_monotone(std::span<const double> values, Trend trend, double tol = 1e-9);

/// Monotonicity of one column over the rows with status Ok.
Monotonicity check_monotone(const SweepResult& r, double SweepRow::*column, Trend trend,
                            double tol = 1e-9);

struct BoundCheck {
    std::string name;
    bool applicable = false;
    bool holds = false;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  ///< positive when the inequality holds
};

struct BoundsReport {
    std::vector<BoundCheck> checks;
    [[nodiscard]] bool all_hold() const;
    [[nodiscard]] std::size_t applicable_count() const;
};

/// Evaluates the classical wedge bounds whose preconditions hold for d:
///   sale_upper      p^* < eps / ((1-gamma) delta^2 R / 2 + gamma eps)       eps > 0
///   sale_lower      p^* > eps / ((1-gamma) delta^2 R + gamma eps)           eps > 0
///   purchase_upper  0 < p_* < eps / ((1+lambda) delta^2 R - lambda eps)     0 < eps < delta^2 R (1+lambda)/lambda
///   sale_refined    p^* < (2eps - delta^2 R)/((1-2gamma) delta^2 R + 2gamma eps)   q_M > 1
///   sale_fraction   q^* < min(2 q_M, 1)                                     0 < q_M < 1
///   merton_inside   p^* = q^* > q_M                                         gamma = 0, q_M > 1
BoundsReport check_bounds(const WedgeSolution& sol, const PolicySpec& spec,
                          const DimensionlessParams& d);

}  // namespace wedge
