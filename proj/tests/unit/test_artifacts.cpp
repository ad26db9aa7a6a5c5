#include "helpers.hpp"

#include "pevcc/artifacts.hpp"
#include "pevcc/scenario.hpp"

#include <doctest.h>

#include <charconv>
#include <random>

using namespace pevcc;

TEST_SUITE("artifacts") {

TEST_CASE("numbers print shortest and read back exactly")
{
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(gen) * std::pow(10.0, i % 20 - 10);
        const auto s = format_number(v);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == v);
    }
    CHECK(format_number(0.5) == "0.5");
}

TEST_CASE("schedule and load files round-trip")
{
    const auto dir = testing::scratch_dir("artifacts");
    const std::vector<Vec> x{(Vec(3) << 0.1, 2.0 / 3.0, 11.0).finished(), (Vec(3) << 0, 1e-17, 5).finished()};
    write_schedules_csv(dir / "s.csv", x);
    const auto back = read_schedules_csv(dir / "s.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0] == x[0]);
    CHECK(back[1] == x[1]);

    write_load_csv(dir / "l.csv", x[0]);
    CHECK(read_load_csv(dir / "l.csv") == x[0]);
}

TEST_CASE("run traces and central solutions round-trip")
{
    const auto s = load_scenario(testing::data_path("fixtures/three_pev.json"));
    const auto p = build_problem(s);
    const auto t = scenario_topology(s);
    const auto sol = solve_centralized(p);
    const auto dir = testing::scratch_dir("trace");

    write_solution(dir, p, sol, kkt_residual(p, sol));
    const auto stored = read_solution(dir);
    CHECK(stored.objective == sol.objective_star);
    CHECK(stored.load == sol.load_star);
    CHECK(stored.schedules.size() == 3);

    auto c = solver_config(s, p, t);
    c.max_iterations = 250;
    c.stop_on_tolerance = false;
    std::vector<IterationRecord> seen;
    RunOptions o;
    o.oracle = OracleReference{sol.objective_star, sol.load_star};
    {
        TraceWriter w(dir);
        o.sink = [&](const IterationRecord& r, const std::vector<AgentState>& a) {
            seen.push_back(r);
            w(r, a);
        };
        run(p, t, c, o);
    }
    const auto trace = read_trace_csv(dir / "trace.csv");
    const auto progress = read_progress_csv(dir / "progress.csv");
    REQUIRE(trace.size() == 250);
    REQUIRE(progress.size() == 250);
    for (std::size_t i = 0; i < 250; ++i) {
        CHECK(trace[i].iteration == seen[i].iteration);
        CHECK(trace[i].rel_obj == seen[i].rel_obj);
        CHECK(trace[i].rel_load == seen[i].rel_load);
        CHECK(progress[i].objective == seen[i].objective);
        CHECK(progress[i].max_local_residual == seen[i].max_local_residual);
    }

    write_convergence_csv(dir / "c.csv", trace);
    const auto again = read_trace_csv(dir / "c.csv");
    CHECK(again.back().max_kkt_residual == trace.back().max_kkt_residual);
}

}
