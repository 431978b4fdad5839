#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wedge/params.hpp"
#include "wedge/policy.hpp"

namespace wedge {

struct SimConfig {
    std::size_t paths = 10000;
    double dt = 1e-3;
    double horizon = 40.0;
    std::uint64_t seed = 1;
    double x0 = 1.0;       ///< initial cash
    double y_theta0 = 0.0; ///< initial risky wealth
    /// Brownian increments are drawn on this grid and summed up to dt, so
    /// runs with different dt can share noise. Zero means dt.
    double noise_dt = 0.0;
};

/// Throws WedgeError(ConfigInvalid).
void validate(const SimConfig& cfg, const PolicySpec& spec);

struct SimResult {
    std::size_t paths = 0;
    std::size_t steps = 0;
    double dt = 0.0;
    double mean_utility = 0.0;  ///< including the tail continuation value
    double std_error = 0.0;
    double mean_without_tail = 0.0;
    double mean_tail = 0.0;
    double analytic_value = 0.0;
    double z_score = 0.0;
    std::size_t insolvent_paths = 0;
    Action first_action = Action::NoTrade;
    double buy_fraction = 0.0;   ///< share of steps with a purchase
    double sell_fraction = 0.0;  ///< share of steps with a sale
    std::vector<double> path_values;
};

/// Simulates cash and risky wealth under the wedge policy: exact log-normal
/// risky returns, Euler consumption at the optimal rate, and at every step
/// the minimal trade that returns p to the violated boundary. Discounted
/// utility is summed by the trapezoid rule and the tail beyond the horizon
/// is the analytic continuation value. Bit-identical for a fixed config.
SimResult simulate_policy(const PolicySpec& spec, const DimensionlessParams& d,
                          const SimConfig& cfg);

struct DtStudy {
    std::vector<double> dts;
    std::vector<SimResult> runs;
    std::vector<double> bias;          ///< mean - analytic per run
    std::vector<double> increment;     ///< bias[k+1] - bias[k], estimated on paired paths
    std::vector<double> pair_error;    ///< standard error of increment[k]
    bool trend_non_increasing = false;
};

/// Runs cfg at each dt (descending) on shared noise drawn at the finest dt.
/// Every run carries the same sampling error, so the discretization bias is
/// read from the paired increments: the trend holds when |increment| never
/// grows by more than three combined standard errors from one halving to the
/// next.
DtStudy dt_halving_study(const PolicySpec& spec, const DimensionlessParams& d, SimConfig cfg,
                         std::span<const double> dts);

struct Verdict {
    double z_score = 0.0;
    bool z_ok = false;
    bool trend_ok = true;
    [[nodiscard]] bool pass() const { return z_ok && trend_ok; }
};

Verdict compare(const SimResult& sim);
Verdict compare(const SimResult& sim, const DtStudy& study);

/// Pairwise summation.
double pairwise_sum(std::span<const double> v);

}  // namespace wedge
