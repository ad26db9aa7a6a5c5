#include "helpers.hpp"

#include "pevcc/ci_solver.hpp"
#include "pevcc/errors.hpp"
#include "pevcc/scenario.hpp"

#include <doctest.h>

#include <cstring>
#include <limits>
#include <random>

using namespace pevcc;

namespace {

AgentState scalar_state(double x, double load, double lambda, int mu_rows = 4)
{
    AgentState s;
    s.x = Vec::Constant(1, x);
    s.load_estimate = Vec::Constant(1, load);
    s.lambda = Vec::Constant(1, lambda);
    s.mu = Vec::Zero(mu_rows);
    return s;
}

struct Fixture {
    Scenario scenario = load_scenario(testing::data_path("fixtures/three_pev.json"));
    Problem problem = build_problem(scenario);
    Topology topology = scenario_topology(scenario);
    SolverConfig config = solver_config(scenario, problem, topology);
};

// bitwise, so NaN metrics of oracle-free runs compare equal
bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_record(const IterationRecord& a, const IterationRecord& b)
{
    return a.iteration == b.iteration && same_bits(a.objective, b.objective) &&
           same_bits(a.total_energy, b.total_energy) && same_bits(a.rel_obj, b.rel_obj) &&
           same_bits(a.rel_load, b.rel_load) && same_bits(a.consensus_disagreement, b.consensus_disagreement) &&
           same_bits(a.max_kkt_residual, b.max_kkt_residual) && same_bits(a.max_local_residual, b.max_local_residual);
}

std::vector<IterationRecord> record_run(const Problem& p, const Topology& t, const SolverConfig& c, RunOptions o = {})
{
    std::vector<IterationRecord> out;
    o.sink = [&](const IterationRecord& r, const std::vector<AgentState>&) { out.push_back(r); };
    run(p, t, c, o);
    return out;
}

}  // namespace

TEST_SUITE("ci_solver") {

TEST_CASE("step sizes")
{
    TuningSchedule s;
    s.alpha0 = 2.0;
    s.beta0 = 3.0;
    s.gamma = 0.5;
    s.delta = 0.25;
    const auto k0 = step_sizes(s, 0);
    CHECK(k0.alpha == 2.0);
    CHECK(k0.beta == 3.0);
    CHECK(k0.gamma == 0.5);
    CHECK(k0.delta == 0.25);
    CHECK(step_sizes(s, 1000).gamma == 0.5);

    TuningSchedule unit;
    unit.alpha0 = unit.beta0 = 1.0;
    double prev = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (long k = 0; k < 1000000; ++k) {
        const auto st = step_sizes(unit, k);
        sum_a += st.alpha;
        sum_b += st.beta;
        if (k % 100000 == 99999) {
            const double ratio = st.beta / st.alpha;
            CHECK(ratio == doctest::Approx(std::pow(k + 1.0, 0.09)));
            CHECK(ratio > prev);
            prev = ratio;
        }
    }
    CHECK(sum_a > 100.0);
    CHECK(sum_b > 100.0);

    TuningSchedule g = s;
    g.tau_gamma = 0.5;
    CHECK(step_sizes(g, 3).gamma == doctest::Approx(0.25));
    CHECK_THROWS_AS(step_sizes(s, -1), InvalidInput);
}

TEST_CASE("schedule invariants")
{
    TuningSchedule s;
    CHECK_NOTHROW(s.validate());
    s.tau_beta = 0.6;
    CHECK_THROWS_AS(s.validate(), InvalidInput);
    s = TuningSchedule{};
    s.tau_alpha = 1.2;
    CHECK_THROWS_AS(s.validate(), InvalidInput);
    s = TuningSchedule{};
    s.gamma = 0.0;
    CHECK_THROWS_AS(s.validate(), InvalidInput);
    s = TuningSchedule{};
    s.tau_gamma = -0.1;
    CHECK_THROWS_AS(s.validate(), InvalidInput);
}

TEST_CASE("price update")
{
    const StepSizes st{0.05, 0.1, 1.0, 1.0};
    const auto s = scalar_state(1.5, 10.0, 2.0);
    CHECK(lambda_update(s, {Vec::Constant(1, 4.0)}, 10, st)(0) == doctest::Approx(2.225));

    // balanced share and agreeing neighbours: nothing moves
    const auto eq = scalar_state(1.0, 10.0, 3.0);
    CHECK(lambda_update(eq, {Vec::Constant(1, 3.0), Vec::Constant(1, 3.0)}, 10, st)(0) == 3.0);

    // over-consumption raises the price
    const auto over = scalar_state(2.0, 10.0, 3.0);
    CHECK(lambda_update(over, {Vec::Constant(1, 3.0)}, 10, st)(0) > 3.0);

    CHECK_THROWS_AS(lambda_update(s, {Vec::Constant(1, 4.0)}, 0, st), InvalidInput);
    CHECK_THROWS_AS(lambda_update(s, {Vec::Constant(2, 4.0)}, 10, st), DimensionError);
}

TEST_CASE("load estimate update")
{
    CostModel c;
    c.c1 = 1.0;
    c.c2 = Vec::Constant(2, 4.0);
    AgentState s;
    s.lambda = c.c2;
    CHECK(load_estimate_update(s, c).isZero());
    s.lambda = (Vec(2) << 10, 2).finished();
    const Vec l = load_estimate_update(s, c);
    CHECK(l(0) == 3.0);
    CHECK(l(1) == 0.0);
}

TEST_CASE("schedule update")
{
    const EnergyConstraintSet one{EnergyOperator(1, 1.0), Vec::Zero(4)};
    const PowerBounds pb{Vec::Zero(1), Vec::Constant(1, 11.0)};

    auto s = scalar_state(5.0, 0.0, 0.0);
    CHECK(schedule_update(s, one, pb, 0.1)(0) == 5.0);

    s.lambda(0) = 1e6;
    CHECK(schedule_update(s, one, pb, 0.1)(0) == 0.0);

    s.lambda(0) = 1.0;
    s.mu(0) = 2.0;  // only the first row contributes, as a lone A = [1]
    CHECK(schedule_update(s, one, pb, 0.1)(0) == doctest::Approx(4.7));

    s.lambda(0) = -1e6;
    CHECK(schedule_update(s, one, pb, 0.1)(0) == 11.0);
}

TEST_CASE("energy multiplier update")
{
    // A x = [x, -x, x, -x]
    EnergyConstraintSet one{EnergyOperator(1, 1.0), (Vec(4) << 5, 5, 5, 5).finished()};
    auto s = scalar_state(1.0, 0.0, 0.0);
    CHECK(mu_update(s, one, 0.5).isZero());

    one.b << 1, -1, 1, -1;
    s.mu << 0.3, 0.0, 0.7, 0.2;
    CHECK((mu_update(s, one, 0.5) - s.mu).isZero());

    one.b << -1, 5, 5, 5;  // first row violated by 2
    s.mu << 1.0, 0.0, 0.0, 0.0;
    CHECK(mu_update(s, one, 0.5)(0) == doctest::Approx(2.0));
}

TEST_CASE("one parallel round from the optimum")
{
    Fixture f;
    const auto sol = solve_centralized(f.problem);
    const int V = f.problem.fleet_size();
    std::vector<AgentState> start(V);
    for (int v = 0; v < V; ++v)
        start[v] = {sol.x_star[v], sol.load_star, sol.lambda_star, sol.mu_star[v]};

    SolverConfig c = f.config;
    c.max_iterations = 1;
    c.stop_on_tolerance = false;
    RunOptions o;
    o.warm_start = start;
    const auto res = run(f.problem, f.topology, c, o);
    const auto st = step_sizes(c.schedule, 0);

    Vec mean_before = Vec::Zero(f.problem.steps()), mean_after = mean_before;
    for (int v = 0; v < V; ++v) {
        const auto& a = res.agents[v];
        CHECK((a.load_estimate - sol.load_star).cwiseAbs().maxCoeff() < 1e-7);
        CHECK((a.x - sol.x_star[v]).cwiseAbs().maxCoeff() < 1e-7);
        CHECK((a.mu - sol.mu_star[v]).cwiseAbs().maxCoeff() < 1e-7);
        // the price moves only by this agent's imbalance against an equal share
        const Vec expected = sol.lambda_star - st.alpha * (sol.load_star / V - sol.x_star[v]);
        CHECK((a.lambda - expected).cwiseAbs().maxCoeff() < 1e-9);
        mean_before += start[v].lambda / V;
        mean_after += a.lambda / V;
    }
    CHECK((mean_after - mean_before).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("iterates respect bounds and signs every round")
{
    Fixture f;
    auto check_states = [&](const IterationRecord&, const std::vector<AgentState>& agents) {
        for (int v = 0; v < f.problem.fleet_size(); ++v) {
            const auto& a = agents[v];
            const auto& pb = f.problem.vehicles[v].power;
            REQUIRE(((a.x - pb.lower).array() >= 0.0).all());
            REQUIRE(((pb.upper - a.x).array() >= 0.0).all());
            REQUIRE((a.mu.array() >= 0.0).all());
            REQUIRE((a.load_estimate.array() >= 0.0).all());
        }
    };
    SolverConfig c = f.config;
    c.max_iterations = 5000;
    for (auto mode : {UpdateMode::parallel, UpdateMode::serial}) {
        c.mode = mode;
        RunOptions o;
        o.sink = check_states;
        o.faults = LinkFaultModel{0.1, 3};
        run(f.problem, f.topology, c, o);
    }
}

TEST_CASE("runs are bit-reproducible, also across thread counts and with faults")
{
    Fixture f;
    SolverConfig c = f.config;
    c.max_iterations = 3000;
    c.stop_on_tolerance = false;
    RunOptions o;
    o.faults = LinkFaultModel{0.05, 11};
    const auto a = record_run(f.problem, f.topology, c, o);
    const auto b = record_run(f.problem, f.topology, c, o);
    c.threads = 3;
    const auto d = record_run(f.problem, f.topology, c, o);
    REQUIRE(a.size() == 3000);
    bool same_ab = true, same_ad = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same_ab = same_ab && same_record(a[i], b[i]);
        same_ad = same_ad && same_record(a[i], d[i]);
    }
    CHECK(same_ab);
    CHECK(same_ad);

    o.faults = LinkFaultModel{0.05, 12};
    c.threads = 1;
    const auto e = record_run(f.problem, f.topology, c, o);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        any_diff = any_diff || !same_record(a[i], e[i]);
    CHECK(any_diff);
}

TEST_CASE("only prices cross the exchange")
{
    Fixture f;
    SolverConfig c = f.config;
    c.max_iterations = 50;
    c.stop_on_tolerance = false;
    for (auto mode : {UpdateMode::parallel, UpdateMode::serial}) {
        c.mode = mode;
        std::vector<AgentState> prev = initial_states(f.problem);
        long messages = 0;
        RunOptions o;
        o.sink = [&](const IterationRecord&, const std::vector<AgentState>& agents) {
            prev = agents;
        };
        o.observer = [&](long, int receiver, const std::vector<PriceMessage>& inbox) {
            const auto& nb = f.topology.neighbors(receiver);
            for (const auto& m : inbox) {
                ++messages;
                CHECK(std::find(nb.begin(), nb.end(), m.sender) != nb.end());
                REQUIRE(m.price != nullptr);
                // in a serial sweep, earlier agents already publish this round's price
                if (mode == UpdateMode::parallel || m.sender > receiver)
                    CHECK(*m.price == prev[m.sender].lambda);
                CHECK(m.price->size() == f.problem.steps());
            }
        };
        run(f.problem, f.topology, c, o);
        CHECK(messages == 50 * 4);
    }
}

TEST_CASE("update directions match finite differences of the Lagrangian")
{
    Fixture f;
    const auto& p = f.problem;
    const int V = p.fleet_size(), T = p.steps();
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const PowerBounds free_bounds{Vec::Constant(T, -std::numeric_limits<double>::infinity()),
                                  Vec::Constant(T, std::numeric_limits<double>::infinity())};
    const double h = 1e-3;
    auto rel = [](const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff() / std::max(1e-12, b.cwiseAbs().maxCoeff()); };

    for (int point = 0; point < 100; ++point) {
        CentralSolution s;
        s.load_star = Vec(T);
        s.lambda_star = Vec(T);
        for (int t = 0; t < T; ++t) {
            s.load_star(t) = 5.0 * u(gen);
            s.lambda_star(t) = p.cost.c2(t) + 2.0 * u(gen) - 1.0;
        }
        for (int v = 0; v < V; ++v) {
            Vec x(T), mu(2 * T + 2);
            for (auto& e : x) e = 3.0 * u(gen);
            for (auto& e : mu) e = 100.0 + 10.0 * u(gen);  // keeps the projection inactive
            s.x_star.push_back(x);
            s.mu_star.push_back(mu);
            s.mu_plus_star.push_back(Vec::Zero(T));
            s.mu_minus_star.push_back(Vec::Zero(T));
        }
        auto fd = [&](auto&& coord) {
            double& c = coord(s);
            const double keep = c;
            c = keep + h;
            const double up = lagrangian_value(p, s);
            c = keep - h;
            const double down = lagrangian_value(p, s);
            c = keep;
            return (up - down) / (2.0 * h);
        };

        // load estimate: stationarity expression 2 c1 L + c2 - lambda
        Vec fd_load(T);
        for (int t = 0; t < T; ++t)
            fd_load(t) = fd([t](CentralSolution& z) -> double& { return z.load_star(t); });
        CHECK(rel(objective_gradient(p.cost, s.load_star) - s.lambda_star, fd_load) <= 1e-6);

        for (int v = 0; v < V; ++v) {
            AgentState a{s.x_star[v], s.load_star, s.lambda_star, s.mu_star[v]};
            // schedule: x - update(delta = 1, no clamping) = lambda + A'mu
            const Vec dir = a.x - schedule_update(a, p.vehicles[v].energy, free_bounds, 1.0);
            Vec fd_x(T);
            for (int t = 0; t < T; ++t)
                fd_x(t) = fd([v, t](CentralSolution& z) -> double& { return z.x_star[v](t); });
            CHECK(rel(dir, fd_x) <= 1e-6);

            // energy multipliers: update(gamma = 1) - mu = A x - b while mu stays positive
            const Vec step = mu_update(a, p.vehicles[v].energy, 1.0) - a.mu;
            Vec fd_mu(2 * T + 2);
            for (int r = 0; r < 2 * T + 2; ++r)
                fd_mu(r) = fd([v, r](CentralSolution& z) -> double& { return z.mu_star[v](r); });
            CHECK(rel(step, fd_mu) <= 1e-6);
        }
    }
}

TEST_CASE("a lone vehicle converges to its own optimum")
{
    Fixture f;
    Scenario s = f.scenario;
    s.fleet.resize(1);
    s.solver.schedule.reset();
    const auto p = build_problem(s);
    const auto t = scenario_topology(s);
    REQUIRE(t.num_agents() == 1);
    const auto oracle = solve_centralized(p);
    SolverConfig c = solver_config(s, p, t);
    c.schedule = suggest_schedule(p, t, 0.4, 0.1, 0.05);
    c.max_iterations = 50000;
    RunOptions o;
    o.oracle = OracleReference{oracle.objective_star, oracle.load_star};
    const auto res = run(p, t, c, o);
    CHECK(res.last.rel_obj <= 1e-3);
}

TEST_CASE("fixture run reaches the oracle and stops on its own criteria")
{
    Fixture f;
    const auto oracle = solve_centralized(f.problem);
    RunOptions o;
    o.oracle = OracleReference{oracle.objective_star, oracle.load_star};
    const auto res = run(f.problem, f.topology, f.config, o);
    CHECK(res.iterations <= 50000);
    CHECK(res.last.rel_obj <= 1e-3);
    CHECK(res.last.rel_load <= 1e-3);
    CHECK(res.last.max_kkt_residual <= 1e-2);

    SolverConfig loose = f.config;
    loose.tol = {1.0, 1.0};
    const auto quick = run(f.problem, f.topology, loose, o);
    CHECK(quick.reason == StopReason::tolerance);
    CHECK(quick.iterations < res.iterations);
}

TEST_CASE("run rejects mismatched inputs")
{
    Fixture f;
    CHECK_THROWS_AS(run(f.problem, Topology::path(4), f.config), TopologyError);
    SolverConfig c = f.config;
    c.max_iterations = 0;
    CHECK_THROWS_AS(run(f.problem, f.topology, c), InvalidInput);
    RunOptions o;
    o.warm_start = initial_states(f.problem);
    o.warm_start.pop_back();
    CHECK_THROWS_AS(run(f.problem, f.topology, f.config, o), DimensionError);
}

}
