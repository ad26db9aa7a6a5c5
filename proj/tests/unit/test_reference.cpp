#include "helpers.hpp"

#include "pevcc/errors.hpp"
#include "pevcc/reference.hpp"
#include "pevcc/scenario.hpp"

#include <doctest.h>

using namespace pevcc;
using testing::make_spec;

namespace {

Problem single_vehicle(const std::vector<int>& conn, const std::vector<double>& cons, const Vec& c2, double c1 = 1.0,
                       double power = 11.0)
{
    const TimeGrid grid{static_cast<int>(conn.size()), 1.0};
    CostModel cost;
    cost.c1 = c1;
    cost.c2 = c2;
    cost.inelastic_load_kw = Vec::Zero(c2.size());
    return make_problem(grid, {make_spec(0, conn, cons, 10.0, 0.2, 1.0, power, 5.0)}, cost);
}

void check_certified(const Problem& problem, const CentralSolution& sol, double tol)
{
    const auto r = kkt_residual(problem, sol);
    CHECK(r.max() <= tol);
    CHECK(std::abs(lagrangian_value(problem, sol) - sol.objective_star) <= tol * std::max(1.0, sol.objective_star));
    CHECK(std::abs(dual_value(problem, sol) - sol.objective_star) <= 1e3 * tol * std::max(1.0, sol.objective_star));
}

}  // namespace

TEST_SUITE("reference") {

TEST_CASE("idle vehicle stays idle and certifies exactly")
{
    const auto p = single_vehicle({1, 1, 1}, {0, 0, 0}, Vec::Zero(3));
    for (const auto& sol : {solve_centralized(p), solve_centralized_block_descent(p)}) {
        CHECK(sol.x_star[0].cwiseAbs().maxCoeff() < 1e-8);
        CHECK(sol.objective_star == doctest::Approx(0.0).epsilon(1e-12));
    }
    CentralSolution exact;
    exact.x_star = {Vec::Zero(3)};
    exact.load_star = Vec::Zero(3);
    exact.lambda_star = Vec::Zero(3);
    exact.mu_star = {Vec::Zero(8)};
    const auto r = kkt_residual(p, exact);
    CHECK(r.max() == 0.0);
}

TEST_CASE("cheap step takes all the charging")
{
    // two connected steps priced 0 and 10, then a 3 kWh trip
    const double e = 3.0;
    Vec c2(3);
    c2 << 0.0, 10.0, 0.0;
    const auto p = single_vehicle({1, 1, 0}, {0, 0, e}, c2);
    double best = 1e300, bx = 0, by = 0;
    for (int i = 0; i <= 300; ++i) {
        const double a = e * i / 300.0, b = e - a;  // terminal row fixes a + b = e
        const Vec l = (Vec(3) << a, b, 0.0).finished();
        const Vec x = l;
        if (p.vehicles[0].energy.violation(x) > 1e-12)
            continue;
        const double f = evaluate_objective(p.cost, l);
        if (f < best) {
            best = f;
            bx = a;
            by = b;
        }
    }
    CHECK(bx == doctest::Approx(e));
    CHECK(by == doctest::Approx(0.0));
    for (const auto& sol : {solve_centralized(p), solve_centralized_block_descent(p)}) {
        CHECK(sol.x_star[0](0) == doctest::Approx(e).epsilon(1e-8));
        CHECK(std::abs(sol.x_star[0](1)) < 1e-7);
        CHECK(sol.objective_star == doctest::Approx(best).epsilon(1e-8));
        check_certified(p, sol, 1e-6);
    }
}

TEST_CASE("residual grows linearly with a perturbation of an interior coordinate")
{
    const auto s = load_scenario(testing::data_path("fixtures/three_pev.json"));
    const auto p = build_problem(s);
    const auto sol = solve_centralized(p);
    int v = -1, t = -1;
    for (int i = 0; i < p.fleet_size() && v < 0; ++i)
        for (int k = 0; k < p.steps(); ++k)
            if (sol.x_star[i](k) > 1e-3 && sol.x_star[i](k) < p.vehicles[i].power.upper(k) - 1e-3) {
                v = i;
                t = k;
                break;
            }
    REQUIRE(v >= 0);
    auto perturbed = [&](double eps) {
        CentralSolution c = sol;
        c.x_star[v](t) += eps;
        c.mu_plus_star.clear();
        c.mu_minus_star.clear();
        return kkt_residual(p, c);
    };
    const auto r0 = kkt_residual(p, sol);
    const auto r1 = perturbed(1e-4);
    const auto r2 = perturbed(2e-4);
    CHECK(r1.load_balance == doctest::Approx(1e-4).epsilon(1e-6));
    CHECK(r2.load_balance / r1.load_balance == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(r1.stationarity_load == doctest::Approx(r0.stationarity_load));
    const double d1 = r1.complementarity - r0.complementarity, d2 = r2.complementarity - r0.complementarity;
    if (d1 > 1e-9)
        CHECK(d2 / d1 == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("fixture optimum: two methods and the frozen independent value agree")
{
    const auto s = load_scenario(testing::data_path("fixtures/three_pev.json"));
    const auto p = build_problem(s);
    const auto ipm = solve_centralized(p);
    const auto bd = solve_centralized_block_descent(p);
    CHECK(std::abs(ipm.objective_star - bd.objective_star) / ipm.objective_star < 1e-8);
    CHECK(std::abs(ipm.objective_star - testing::kFixtureObjective) / testing::kFixtureObjective < 1e-8);
    CHECK(ipm.load_star.sum() == doctest::Approx(testing::kFixtureTotalLoad).epsilon(1e-9));
    CHECK((ipm.load_star - bd.load_star).cwiseAbs().maxCoeff() < 1e-6);
    check_certified(p, ipm, 1e-6);
    check_certified(p, bd, 1e-6);
    for (int v = 0; v < p.fleet_size(); ++v) {
        CHECK(ipm.mu_star[v].minCoeff() >= 0.0);
        CHECK(ipm.mu_plus_star[v].minCoeff() >= 0.0);
        CHECK(ipm.mu_minus_star[v].minCoeff() >= 0.0);
    }
}

TEST_CASE("100-PEV optimum matches the frozen independent value")
{
    const auto s = load_scenario(testing::data_path("scenarios/fleet100.json"));
    const auto p = build_problem(s);
    const auto ipm = solve_centralized(p);
    CHECK(std::abs(ipm.objective_star - testing::kFleet100Objective) / testing::kFleet100Objective < 1e-8);
    CHECK(ipm.load_star.sum() == doctest::Approx(testing::kFleet100TotalLoad).epsilon(1e-9));
    check_certified(p, ipm, 1e-6);
    const auto bd = solve_centralized_block_descent(p);
    CHECK(std::abs(ipm.objective_star - bd.objective_star) / ipm.objective_star < 1e-8);
}

TEST_CASE("infeasible fleets are refused")
{
    const TimeGrid grid{4, 1.0};
    CostModel cost;
    cost.c1 = 1.0;
    cost.c2 = Vec::Zero(4);
    cost.inelastic_load_kw = Vec::Zero(4);
    CHECK_THROWS_AS(make_problem(grid, {make_spec(5, {1, 1, 0, 0}, {0, 0, 5, 0}, 20, 0.2, 1.0, 2.0, 10.0)}, cost),
                    InfeasibleProblem);
}

}
