#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <vector>

#include "wedge/boundary.hpp"
#include "wedge/errors.hpp"
#include "wedge/sim.hpp"

using namespace wedge;

namespace {

struct Fixture {
    DimensionlessParams d = make_params(0.5, 1.0, 2.0 / 3.0, 0.05, 0.05);
    WedgeSolution w = solve_boundaries(d);
    PolicySpec s = build_policy(w, d);

    SimConfig midpoint(std::size_t paths, double dt, double horizon) const {
        SimConfig c;
        c.paths = paths;
        c.dt = dt;
        c.horizon = horizon;
        const double p = 0.5 * (s.p_star + s.p_upper);
        c.x0 = 1.0 - p;
        c.y_theta0 = p;
        return c;
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

}  // namespace

TEST_CASE("simulation examples: first trade restores the wedge") {
    const auto& f = fixture();
    SUBCASE("risky share above the sale boundary sells") {
        SimConfig c = f.midpoint(20, 1e-2, 1.0);
        c.x0 = 0.05;
        c.y_theta0 = 0.95;
        REQUIRE(0.95 > f.s.p_upper);
        const auto r = simulate_policy(f.s, f.d, c);
        CHECK(r.first_action == Action::Sell);
        CHECK(r.sell_fraction > 0.0);
    }
    SUBCASE("zero risky endowment buys") {
        SimConfig c = f.midpoint(20, 1e-2, 1.0);
        c.x0 = 1.0;
        c.y_theta0 = 0.0;
        const auto r = simulate_policy(f.s, f.d, c);
        CHECK(r.first_action == Action::Buy);
        CHECK(r.buy_fraction > 0.0);
    }
    SUBCASE("start inside the wedge does not trade at once") {
        const auto r = simulate_policy(f.s, f.d, f.midpoint(20, 1e-2, 1.0));
        CHECK(r.first_action == Action::NoTrade);
    }
}

TEST_CASE("simulation is bit-identical for a fixed config") {
    const auto& f = fixture();
    const SimConfig c = f.midpoint(64, 1e-2, 2.0);
    ::setenv("WEDGE_THREADS", "1", 1);
    const auto a = simulate_policy(f.s, f.d, c);
    ::setenv("WEDGE_THREADS", "3", 1);
    const auto b = simulate_policy(f.s, f.d, c);
    ::unsetenv("WEDGE_THREADS");
    REQUIRE(a.path_values.size() == b.path_values.size());
    for (std::size_t i = 0; i < a.path_values.size(); ++i) CHECK(a.path_values[i] == b.path_values[i]);
    CHECK(a.mean_utility == b.mean_utility);
    CHECK(a.std_error == b.std_error);

    SimConfig other = c;
    other.seed = 2;
    CHECK(simulate_policy(f.s, f.d, other).mean_utility != a.mean_utility);
}

TEST_CASE("compare: z = 0 passes, ten standard errors fails") {
    SimResult r;
    r.analytic_value = -3.0;
    r.std_error = 0.01;
    r.mean_utility = -3.0;
    CHECK(compare(r).z_ok);
    CHECK(compare(r).z_score == 0.0);
    r.mean_utility = -3.0 + 10.0 * r.std_error;
    CHECK_FALSE(compare(r).z_ok);
    CHECK(compare(r).z_score == doctest::Approx(10.0));
    r.mean_utility = -3.0 - 2.9 * r.std_error;
    CHECK(compare(r).pass());

    DtStudy st;
    st.trend_non_increasing = false;
    r.mean_utility = -3.0;
    CHECK_FALSE(compare(r, st).pass());
}

TEST_CASE("invalid configurations are rejected") {
    const auto& f = fixture();
    auto expect_invalid = [&](SimConfig c) {
        try {
            validate(c, f.s);
            FAIL("accepted");
        } catch (const WedgeError& e) {
            CHECK(e.kind() == ErrorKind::ConfigInvalid);
        }
    };
    SimConfig c = f.midpoint(10, 1e-2, 1.0);
    CHECK_NOTHROW(validate(c, f.s));
    SimConfig bad = c;
    bad.paths = 0;
    expect_invalid(bad);
    bad = c;
    bad.dt = -1e-3;
    expect_invalid(bad);
    bad = c;
    bad.horizon = 1.005;
    expect_invalid(bad);
    bad = c;
    bad.noise_dt = 3e-3;
    expect_invalid(bad);
    bad = c;
    bad.x0 = -1.0;
    bad.y_theta0 = 0.5;
    expect_invalid(bad);
    CHECK_THROWS_AS((void)simulate_policy(f.s, f.d, bad), WedgeError);
}

TEST_CASE("the policy keeps every path solvent") {
    const auto& f = fixture();
    for (auto [x, y] : {std::pair{1.0, 0.0}, std::pair{0.0, 1.0}, std::pair{-0.4, 1.4}}) {
        SimConfig c = f.midpoint(200, 1e-2, 20.0);
        c.x0 = x;
        c.y_theta0 = y;
        const auto r = simulate_policy(f.s, f.d, c);
        CHECK(r.insolvent_paths == 0u);
    }
}

TEST_CASE("simulated value does not beat the analytic optimum") {
    const auto& f = fixture();
    const auto r = simulate_policy(f.s, f.d, f.midpoint(1000, 5e-3, 20.0));
    CAPTURE(r.mean_utility);
    CAPTURE(r.analytic_value);
    CAPTURE(r.std_error);
    CHECK(r.mean_utility <= r.analytic_value + 3.0 * r.std_error);
    CHECK(std::abs(r.z_score) <= 3.0);
    CHECK(r.mean_tail > 0.0);
    CHECK(r.mean_tail < std::exp(-20.0) * r.analytic_value);
    CHECK(r.mean_utility == doctest::Approx(r.mean_without_tail + r.mean_tail));
}

TEST_CASE("dt study shares noise and orders runs by descending dt") {
    const auto& f = fixture();
    const SimConfig c = f.midpoint(50, 1e-2, 1.0);
    const std::vector<double> one = {1e-2};
    const auto single = dt_halving_study(f.s, f.d, c, one);
    const auto direct = simulate_policy(f.s, f.d, c);
    CHECK(single.runs.front().mean_utility == direct.mean_utility);
    CHECK(single.pair_error.empty());
    CHECK(single.trend_non_increasing);

    const std::vector<double> dts = {2.5e-3, 1e-2, 5e-3};
    const auto st = dt_halving_study(f.s, f.d, c, dts);
    CHECK(st.dts == std::vector<double>{1e-2, 5e-3, 2.5e-3});
    REQUIRE(st.runs.size() == 3u);
    REQUIRE(st.pair_error.size() == 2u);
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(st.bias[k] == st.runs[k].mean_utility - st.runs[k].analytic_value);
    // Shared noise makes consecutive runs far closer than independent ones.
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(st.pair_error[k] < st.runs[k].std_error);
        CHECK(st.increment[k] == doctest::Approx(st.bias[k + 1] - st.bias[k]).epsilon(1e-9));
    }
    CHECK_THROWS_AS((void)dt_halving_study(f.s, f.d, c, std::vector<double>{}), WedgeError);
}

TEST_CASE("dt study sees first-order convergence") {
    const auto& f = fixture();
    const std::vector<double> dts = {2e-2, 1e-2, 5e-3};
    const auto st = dt_halving_study(f.s, f.d, f.midpoint(1000, 1e-2, 10.0), dts);
    REQUIRE(st.increment.size() == 2u);
    CHECK(st.trend_non_increasing);
    // Halving dt roughly halves the change.
    const double ratio = st.increment[1] / st.increment[0];
    CAPTURE(ratio);
    CHECK(ratio > 0.3);
    CHECK(ratio < 0.7);
}

TEST_CASE("pairwise_sum") {
    std::vector<double> ints(1001);
    std::iota(ints.begin(), ints.end(), 0.0);
    CHECK(pairwise_sum(ints) == 500500.0);
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);

    std::vector<double> tenths(1 << 20, 0.1);
    long double exact = 0.0L;
    for (double v : tenths) exact += static_cast<long double>(v);
    const double naive = std::accumulate(tenths.begin(), tenths.end(), 0.0);
    const double pw = pairwise_sum(tenths);
    CHECK(std::abs(pw - static_cast<double>(exact)) <= std::abs(naive - static_cast<double>(exact)));
    CHECK(std::abs(pw - static_cast<double>(exact)) < 1e-9);
}
