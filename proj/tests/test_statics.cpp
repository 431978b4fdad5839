#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <vector>

#include "wedge/boundary.hpp"
#include "wedge/errors.hpp"
#include "wedge/parallel.hpp"
#include "wedge/statics.hpp"

using namespace wedge;

namespace {

const double kR = 2.0 / 3.0;

std::vector<double> logspace(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
    return v;
}

const BoundCheck& find(const BoundsReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return c;
    FAIL("missing bound " << name);
    return r.checks.front();
}

}  // namespace

TEST_CASE("split_cost keeps the round-trip cost") {
    for (auto [lr, gr] : {std::pair{1.0, 0.0}, std::pair{1.0, 1.0}, std::pair{0.0, 1.0},
                          std::pair{0.3, 0.7}}) {
        for (double xi : {1e-4, 0.1, 2.0, 50.0}) {
            const auto [l, g] = split_cost(xi, lr, gr);
            CHECK(g < 1.0);
            CHECK((l + g) / (1.0 - g) == doctest::Approx(xi).epsilon(1e-13));
            if (lr > 0.0 && gr > 0.0) CHECK(l / g == doctest::Approx(lr / gr).epsilon(1e-13));
        }
    }
    const auto [l, g] = split_cost(0.2, 0.0, 0.0);
    CHECK(l == 0.2);
    CHECK(g == 0.0);
}

TEST_CASE("check_monotone verdicts") {
    using V = Monotonicity::Verdict;
    const std::vector<double> up = {1.0, 2.0, 3.0};
    CHECK(check_monotone(up, Trend::Increasing).verdict == V::Monotone);
    CHECK(check_monotone(up, Trend::NonDecreasing).verdict == V::Monotone);
    const auto bad = check_monotone(up, Trend::NonIncreasing);
    CHECK(bad.verdict == V::Violated);
    CHECK(bad.index == 0u);

    const std::vector<double> flat = {1.0, 2.0, 2.0 + 1e-12, 3.0};
    CHECK(check_monotone(flat, Trend::NonDecreasing).verdict == V::Monotone);
    const auto tie = check_monotone(flat, Trend::Increasing);
    CHECK(tie.verdict == V::Inconclusive);
    CHECK(tie.index == 1u);

    const std::vector<double> wobble = {1.0, 2.0, 2.0 - 1e-12, 3.0};
    CHECK(check_monotone(wobble, Trend::NonDecreasing).verdict == V::Inconclusive);
    const std::vector<double> drop = {1.0, 2.0, 1.9, 3.0};
    const auto v = check_monotone(drop, Trend::NonDecreasing);
    CHECK(v.verdict == V::Violated);
    CHECK(v.index == 1u);
    CHECK(check_monotone(std::vector<double>{}, Trend::Increasing).verdict == V::Monotone);
}

TEST_CASE("sweep_xi in Case 1AbIIii: sale boundary rises, purchase boundary falls") {
    const auto base = make_params(0.5, 1.0, kR, 1.0, 0.0);
    const auto grid = logspace(1e-4, 10.0, 12);
    const auto r = sweep_xi(base, grid);
    REQUIRE(r.rows.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(r.rows[i].value == grid[i]);
        CHECK(r.rows[i].status == PointStatus::Ok);
        CHECK(r.rows[i].case_name == "1AbIIii");
    }
    CHECK(check_monotone(r, &SweepRow::q_upper, Trend::NonDecreasing).verdict ==
          Monotonicity::Verdict::Monotone);
    CHECK(check_monotone(r, &SweepRow::q_star, Trend::NonIncreasing).verdict ==
          Monotonicity::Verdict::Monotone);
}

TEST_CASE("sweep_xi in Case 1AbIii: flat sale boundary beyond the singular threshold") {
    const auto base = make_params(1.5, 1.0, kR, 1.0, 0.0);
    const BoundarySolver s(geometry(base));
    const double xb = *s.thresholds().xi_bar;
    std::vector<double> grid = {0.25 * xb, 0.5 * xb, 0.9 * xb, xb, 1.5 * xb, 3.0 * xb, 10.0 * xb};
    const auto r = sweep_xi(base, grid);
    REQUIRE(r.thresholds.xi_bar.has_value());
    CHECK(*r.thresholds.xi_bar == xb);
    const double plateau = r.rows[3].q_upper;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CAPTURE(i);
        REQUIRE(r.rows[i].status == PointStatus::Ok);
        if (grid[i] >= xb) CHECK(std::abs(r.rows[i].q_upper - plateau) <= 1e-8);
        else CHECK(r.rows[i].q_upper < plateau);
    }
    CHECK(r.rows[0].regime == Regime::Interior);
    CHECK(r.rows[3].regime == Regime::AtSingularIVP);
    CHECK(r.rows[5].regime == Regime::CrossesSingularity);
}

TEST_CASE("sweep_xi in Case 1AbIIi marks ill-posed points") {
    const auto base = make_params(13.5, 6.0, kR, 1.0, 0.0);
    const double xu = wellposedness(base).xi_threshold;
    const std::vector<double> grid = {0.25 * xu, 0.5 * xu, 0.99 * xu, 1.01 * xu, 2.0 * xu};
    const auto r = sweep_xi(base, grid);
    REQUIRE(r.rows.size() == grid.size());
    REQUIRE(r.thresholds.xi_under.has_value());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CAPTURE(i);
        CHECK(r.rows[i].value == grid[i]);
        if (grid[i] <= xu) {
            CHECK(r.rows[i].status == PointStatus::IllPosedForXi);
            CHECK_FALSE(r.rows[i].message.empty());
        } else {
            CHECK(r.rows[i].status == PointStatus::Ok);
        }
        CHECK(r.rows[i].wellposedness == WellPosedness::Kind::Conditional);
    }
}

TEST_CASE("sweep_drift examples") {
    SUBCASE("boundaries increase with the drift") {
        const auto base = make_params(0.3, 1.0, kR, 0.05, 0.05);
        const std::vector<double> grid = {0.1, 0.3, 0.5};
        const auto r = sweep_drift(base, grid);
        for (const auto& row : r.rows) CHECK(row.status == PointStatus::Ok);
        CHECK(check_monotone(r, &SweepRow::p_star, Trend::Increasing).verdict ==
              Monotonicity::Verdict::Monotone);
        CHECK(check_monotone(r, &SweepRow::p_upper, Trend::Increasing).verdict ==
              Monotonicity::Verdict::Monotone);
    }
    SUBCASE("zero drift is a boundary marker") {
        const auto base = make_params(0.3, 1.0, kR, 0.05, 0.05);
        const std::vector<double> grid = {-0.2, 0.0, 0.2};
        const auto r = sweep_drift(base, grid);
        CHECK(r.rows[0].status == PointStatus::Ok);
        CHECK(r.rows[1].status == PointStatus::Boundary);
        CHECK(r.rows[1].case_name == classify_by_eps_range(0.0, 1.0, kR).name());
        CHECK_FALSE(r.rows[1].message.empty());
        CHECK(r.rows[2].status == PointStatus::Ok);
    }
    SUBCASE("negative drift: boundaries negative and still increasing") {
        for (double R : {kR, 2.0}) {
            const auto base = make_params(-0.5, 1.0, R, 0.05, 0.05);
            const std::vector<double> grid = {-0.9, -0.6, -0.3, -0.1};
            const auto r = sweep_drift(base, grid);
            for (const auto& row : r.rows) {
                REQUIRE(row.status == PointStatus::Ok);
                CHECK(row.p_star < 0.0);
                CHECK(row.p_upper < 0.0);
            }
            CHECK(check_monotone(r, &SweepRow::p_star, Trend::Increasing).verdict ==
                  Monotonicity::Verdict::Monotone);
            CHECK(check_monotone(r, &SweepRow::p_upper, Trend::Increasing).verdict ==
                  Monotonicity::Verdict::Monotone);
        }
    }
}

TEST_CASE("sweep output does not depend on the worker count") {
    const auto base = make_params(0.5, 1.0, kR, 1.0, 0.0);
    const auto grid = logspace(1e-3, 1.0, 6);
    ::setenv("WEDGE_THREADS", "1", 1);
    const auto a = sweep_xi(base, grid);
    ::setenv("WEDGE_THREADS", "4", 1);
    const auto b = sweep_xi(base, grid);
    ::unsetenv("WEDGE_THREADS");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(a.rows[i].q_star == b.rows[i].q_star);
        CHECK(a.rows[i].q_upper == b.rows[i].q_upper);
    }
}

TEST_CASE("parallel_for visits every index once and rethrows") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; }, 4);
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
        if (i == 7) throw WedgeError(ErrorKind::StepFailure, "boom");
    }, 3), WedgeError);
}

TEST_CASE("check_bounds examples") {
    SUBCASE("Case 1AbIIii: sale fraction below min(2 q_M, 1)") {
        const auto d = make_params(0.5, 1.0, kR, 0.1, 0.1);
        const auto w = solve_boundaries(d);
        const auto rep = check_bounds(w, build_policy(w, d), d);
        const auto& c = find(rep, "sale_fraction");
        CHECK(c.applicable);
        CHECK(c.holds);
        CHECK(c.rhs == 1.0);
        CHECK(rep.all_hold());
    }
    SUBCASE("free sales with q_M > 1: the Merton line lies inside") {
        const auto d = make_params(1.5, 1.0, kR, 0.2, 0.0);
        const auto w = solve_boundaries(d);
        const auto spec = build_policy(w, d);
        const auto rep = check_bounds(w, spec, d);
        CHECK(spec.p_upper == spec.q_upper);
        CHECK(find(rep, "merton_inside").applicable);
        CHECK(find(rep, "merton_inside").holds);
        CHECK(find(rep, "sale_refined").holds);
        CHECK_FALSE(find(rep, "sale_fraction").applicable);
    }
    SUBCASE("0 < eps < delta^2 R: purchase fraction bound") {
        const auto d = make_params(0.4, 1.0, kR, 0.3, 0.1);
        const auto w = solve_boundaries(d);
        const auto rep = check_bounds(w, build_policy(w, d), d);
        const auto& c = find(rep, "purchase_upper");
        CHECK(c.applicable);
        CHECK(c.holds);
        CHECK(c.lhs > 0.0);
        CHECK(c.lhs < c.rhs);
    }
    SUBCASE("negative drift: no bound applies") {
        const auto d = make_params(-0.5, 1.0, kR, 0.1, 0.1);
        const auto w = solve_boundaries(d);
        const auto rep = check_bounds(w, build_policy(w, d), d);
        CHECK(rep.applicable_count() == 0u);
        CHECK(rep.all_hold());
    }
}

TEST_CASE("bounds hold on random well-posed draws") {
    std::mt19937_64 rng(314);
    std::uniform_real_distribution<double> ueps(0.02, 4.0), udelta(0.3, 2.0), ulog(-4.0, 0.0),
        ucost(0.0, 0.3);
    std::uniform_int_distribution<int> side(0, 2);
    std::uniform_real_distribution<double> uR(0.2, 3.0);
    int solved = 0;
    while (solved < 60) {
        const double R = uR(rng);
        if (std::abs(R - 1.0) < 0.05) continue;
        double lam = ucost(rng), gam = ucost(rng);
        const int s = side(rng);
        if (s == 1) lam = 0.0;
        if (s == 2) gam = 0.0;
        if (lam + gam == 0.0) continue;
        const auto d = make_params(ueps(rng), udelta(rng), R, lam, gam);
        WedgeSolution w;
        try {
            w = solve_boundaries(d);
        } catch (const WedgeError&) {
            continue;
        }
        ++solved;
        const auto rep = check_bounds(w, build_policy(w, d), d);
        for (const auto& c : rep.checks) {
            CAPTURE(c.name);
            CAPTURE(d.eps);
            CAPTURE(d.delta);
            CAPTURE(R);
            CAPTURE(lam);
            CAPTURE(gam);
            if (c.applicable) CHECK(c.holds);
        }
    }
}
