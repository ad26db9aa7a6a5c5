// Acceptance gate: one PASS/FAIL line per criterion, exit code 1 if any fails.

#include "pevcc/ci_solver.hpp"
#include "pevcc/metrics.hpp"
#include "pevcc/reference.hpp"
#include "pevcc/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

using namespace pevcc;

namespace {

constexpr double kFixtureObjective = 6.0726036300909945;  // CLARABEL, frozen
constexpr double kFleet100Objective = 964.7130020267041;
constexpr double kValleyShareFloor = 0.5;
constexpr double kFleet100ValleyShare = 0.8484591781852991;  // measured on the oracle, frozen

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::filesystem::path data(const char* rel) { return std::filesystem::path(PEVCC_DATA_DIR) / rel; }

struct Case {
    Scenario scenario;
    Problem problem;
    Topology topology;
    SolverConfig config;
    CentralSolution oracle;
    double oracle_seconds = 0.0;

    explicit Case(const char* rel)
        : scenario(load_scenario(data(rel))), problem(build_problem(scenario)), topology(scenario_topology(scenario)),
          config(solver_config(scenario, problem, topology))
    {
        const auto t0 = Clock::now();
        oracle = solve_centralized(problem);
        oracle_seconds = seconds_since(t0);
    }
};

// Invariants over every iteration of every acceptance run.
struct InvariantLog {
    long rounds = 0;
    long violations = 0;
    std::string first;

    void check(const Problem& p, const IterationRecord& rec, const std::vector<AgentState>& agents)
    {
        ++rounds;
        for (int v = 0; v < p.fleet_size(); ++v) {
            const auto& a = agents[v];
            const auto& pb = p.vehicles[v].power;
            const bool ok = ((a.x - pb.lower).array() >= 0.0).all() && ((pb.upper - a.x).array() >= 0.0).all() &&
                            (a.mu.array() >= 0.0).all() && (a.load_estimate.array() >= 0.0).all();
            if (!ok && violations++ == 0)
                first = "iteration " + std::to_string(rec.iteration) + ", agent " + std::to_string(v);
        }
    }
};

struct Traced {
    RunResult result;
    std::vector<IterationRecord> records;
    double seconds = 0.0;
};

Traced traced_run(const Case& c, const Topology& topo, SolverConfig cfg, InvariantLog& inv,
                  std::optional<LinkFaultModel> faults = std::nullopt)
{
    Traced out;
    RunOptions o;
    o.oracle = OracleReference{c.oracle.objective_star, c.oracle.load_star};
    o.faults = faults;
    o.sink = [&](const IterationRecord& r, const std::vector<AgentState>& a) {
        out.records.push_back(r);
        inv.check(c.problem, r, a);
    };
    const auto t0 = Clock::now();
    out.result = run(c.problem, topo, cfg, o);
    out.seconds = seconds_since(t0);
    return out;
}

const IterationRecord& at(const Traced& t, long iteration) { return t.records.at(iteration - 1); }

// rel_obj sampled every 100 rounds after round 500 never rises more than 10% above
// its running minimum while it is still above the scenario's accuracy target.
bool monotone_trend(const Traced& t, double target, std::string& detail)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : t.records) {
        if (r.iteration < 500 || r.iteration % 100 != 0)
            continue;
        if (r.rel_obj > 1.1 * best && r.rel_obj > target) {
            detail = "rise at iteration " + std::to_string(r.iteration);
            return false;
        }
        best = std::min(best, r.rel_obj);
    }
    return true;
}

int failures = 0;

void verdict(int id, bool ok, const std::string& text)
{
    std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", text.c_str());
    std::fflush(stdout);
    failures += !ok;
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

}  // namespace

int main()
{
    InvariantLog inv;

    // 1. small-scale oracle equivalence
    Case small("fixtures/three_pev.json");
    const auto cross = solve_centralized_block_descent(small.problem);
    const double method_gap = std::abs(cross.objective_star - small.oracle.objective_star) / small.oracle.objective_star;
    const double frozen_gap = std::abs(kFixtureObjective - small.oracle.objective_star) / kFixtureObjective;
    const auto fixture_run = traced_run(small, small.topology, small.config, inv);
    {
        const auto& last = fixture_run.result.last;
        const bool ok = method_gap <= 1e-8 && frozen_gap <= 1e-8 && last.rel_obj <= 1e-3 && last.rel_load <= 1e-3 &&
                        fixture_run.result.iterations <= 50000 && fixture_run.seconds < 10.0;
        verdict(1, ok,
                fmt("V=3 T=8: rel_obj %.3g rel_load %.3g after %.0f iterations in %.3f s", last.rel_obj, last.rel_load,
                    double(fixture_run.result.iterations), fixture_run.seconds) +
                    fmt("; f* methods agree to %.1e, frozen value to %.1e", method_gap, frozen_gap));
    }

    // 2. paper-scale convergence on the path graph
    Case large("scenarios/fleet100.json");
    SolverConfig fixed = large.config;
    fixed.max_iterations = 10000;
    fixed.stop_on_tolerance = false;
    const auto path_run = traced_run(large, Topology::path(100), fixed, inv);
    {
        const auto& last = path_run.result.last;
        const double total = large.oracle_seconds + path_run.seconds;
        const double frozen = std::abs(kFleet100Objective - large.oracle.objective_star) / kFleet100Objective;
        const bool ok = last.rel_obj <= 0.01 && last.rel_load <= 0.01 && total < 60.0 && frozen <= 1e-8;
        verdict(2, ok,
                fmt("V=100 T=96 path: rel_obj %.4g rel_load %.4g at 10000 iterations, %.1f s total", last.rel_obj,
                    last.rel_load, total) +
                    fmt(" (at 2000: %.4g / %.4g)", at(path_run, 2000).rel_obj, at(path_run, 2000).rel_load));
    }

    // 3. ring beats path at equal iteration counts; gated at the fixed budget of 2, curve reported
    const auto ring_run = traced_run(large, Topology::ring(100), fixed, inv);
    {
        const auto& p = at(path_run, 10000);
        const auto& r = at(ring_run, 10000);
        const bool ok = r.rel_obj < p.rel_obj && r.rel_load < p.rel_load;
        int wins = 0, checkpoints = 0;
        for (long k = 100; k <= 10000; k += 100, ++checkpoints)
            wins += at(ring_run, k).rel_obj < at(path_run, k).rel_obj &&
                    at(ring_run, k).rel_load < at(path_run, k).rel_load;
        std::string text = fmt("ring vs path @10000: rel_obj %.5g < %.5g, rel_load %.5g < %.5g", r.rel_obj,
                               p.rel_obj, r.rel_load, p.rel_load);
        text += fmt("; ring ahead on both at %.0f/%.0f checkpoints", wins, checkpoints);
        text += fmt(" (@2000 rel_obj %.4g vs %.4g, rel_load %.4g vs %.4g)", at(ring_run, 2000).rel_obj,
                    at(path_run, 2000).rel_obj, at(ring_run, 2000).rel_load, at(path_run, 2000).rel_load);
        text += fmt("; diameters %.0f vs %.0f", graph_diameter(Topology::ring(100)),
                    graph_diameter(Topology::path(100)));
        verdict(3, ok, text);
    }

    // 4. KKT certification
    {
        const double r_small = kkt_residual(small.problem, small.oracle).max();
        const double r_large = kkt_residual(large.problem, large.oracle).max();
        const double r_dist =
            kkt_residual(small.problem, assemble_candidate(small.problem, fixture_run.result.agents)).max();
        const bool ok = r_small <= 1e-6 && r_large <= 1e-6 && r_dist <= 1e-2;
        verdict(4, ok,
                fmt("central residuals %.2e (V=3), %.2e (V=100); distributed final state %.2e", r_small, r_large,
                    r_dist));
    }

    // 7 first so its runs count toward the invariant sweep of 5
    std::vector<double> faulted;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto t = traced_run(small, small.topology, small.config, inv, LinkFaultModel{0.05, seed});
        faulted.push_back(t.result.last.rel_obj);
    }
    std::sort(faulted.begin(), faulted.end());

    // 5. invariant suite
    {
        std::string text;
        bool ok = inv.violations == 0;
        text += fmt("bounds/signs held over %.0f rounds", double(inv.rounds));
        if (!ok)
            text += " (first violation " + inv.first + ")";

        // fixed point at the oracle: one round keeps L, x, mu and the mean price
        const int V = small.problem.fleet_size();
        std::vector<AgentState> start(V);
        for (int v = 0; v < V; ++v)
            start[v] = {small.oracle.x_star[v], small.oracle.load_star, small.oracle.lambda_star, small.oracle.mu_star[v]};
        SolverConfig one = small.config;
        one.max_iterations = 1;
        one.stop_on_tolerance = false;
        RunOptions o;
        o.warm_start = start;
        const auto step = run(small.problem, small.topology, one, o);
        double drift = 0.0;
        Vec mean_shift = Vec::Zero(small.problem.steps());
        for (int v = 0; v < V; ++v) {
            const auto& a = step.agents[v];
            drift = std::max({drift, (a.x - start[v].x).cwiseAbs().maxCoeff(),
                              (a.mu - start[v].mu).cwiseAbs().maxCoeff(),
                              (a.load_estimate - start[v].load_estimate).cwiseAbs().maxCoeff()});
            mean_shift += (a.lambda - start[v].lambda) / V;
        }
        const double price_shift = mean_shift.cwiseAbs().maxCoeff();
        ok = ok && drift <= 1e-7 && price_shift <= 1e-9;
        text += fmt("; fixed point drift %.1e, mean price shift %.1e", drift, price_shift);

        // bit determinism, also across thread counts
        SolverConfig again = small.config;
        InvariantLog scratch;
        const auto rerun = traced_run(small, small.topology, again, scratch);
        again.threads = 3;
        const auto threaded = traced_run(small, small.topology, again, scratch);
        bool identical = rerun.records.size() == fixture_run.records.size() &&
                         threaded.records.size() == fixture_run.records.size();
        for (std::size_t i = 0; identical && i < fixture_run.records.size(); ++i) {
            const auto& a = fixture_run.records[i];
            for (const auto* b : {&rerun.records[i], &threaded.records[i]})
                identical = identical && a.objective == b->objective && a.total_energy == b->total_energy &&
                            a.consensus_disagreement == b->consensus_disagreement &&
                            a.max_kkt_residual == b->max_kkt_residual;
        }
        ok = ok && identical;
        text += identical ? "; reruns bit-identical" : "; reruns DIFFER";

        // Lagrangian gradients vs centered differences
        const auto& p = small.problem;
        const int T = p.steps();
        std::mt19937_64 gen(2024);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const PowerBounds open{Vec::Constant(T, -std::numeric_limits<double>::infinity()),
                               Vec::Constant(T, std::numeric_limits<double>::infinity())};
        double worst = 0.0;
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
                for (auto& e : mu) e = 100.0 + 10.0 * u(gen);
                s.x_star.push_back(x);
                s.mu_star.push_back(mu);
                s.mu_plus_star.push_back(Vec::Zero(T));
                s.mu_minus_star.push_back(Vec::Zero(T));
            }
            const double h = 1e-3;
            auto fd = [&](double& c) {
                const double keep = c;
                c = keep + h;
                const double up = lagrangian_value(p, s);
                c = keep - h;
                const double down = lagrangian_value(p, s);
                c = keep;
                return (up - down) / (2.0 * h);
            };
            auto rel = [](const Vec& a, const Vec& b) {
                return (a - b).cwiseAbs().maxCoeff() / std::max(1e-12, b.cwiseAbs().maxCoeff());
            };
            Vec g(T);
            for (int t = 0; t < T; ++t)
                g(t) = fd(s.load_star(t));
            worst = std::max(worst, rel(objective_gradient(p.cost, s.load_star) - s.lambda_star, g));
            for (int v = 0; v < V; ++v) {
                const AgentState a{s.x_star[v], s.load_star, s.lambda_star, s.mu_star[v]};
                Vec gx(T), gm(2 * T + 2);
                for (int t = 0; t < T; ++t)
                    gx(t) = fd(s.x_star[v](t));
                for (int r = 0; r < 2 * T + 2; ++r)
                    gm(r) = fd(s.mu_star[v](r));
                worst = std::max(worst, rel(a.x - schedule_update(a, p.vehicles[v].energy, open, 1.0), gx));
                worst = std::max(worst, rel(mu_update(a, p.vehicles[v].energy, 1.0) - a.mu, gm));
            }
        }
        ok = ok && worst <= 1e-6;
        text += fmt("; gradient check worst relative error %.1e over 100 points", worst);

        std::string why;
        const bool trend = monotone_trend(fixture_run, 1e-3, why) && monotone_trend(path_run, 0.01, why) &&
                           monotone_trend(ring_run, 0.01, why);
        ok = ok && trend;
        text += trend ? "; rel_obj trend monotone within ripple" : "; trend broken: " + why;
        verdict(5, ok, text);
    }

    // 6. valley filling on the 100-PEV oracle
    {
        const auto s = valley_filling_stats(large.oracle.load_star, large.problem.cost.inelastic_load_kw);
        const double peak_rise = (s.combined_peak - s.inelastic_peak) / s.inelastic_peak;
        const bool ok = s.combined_variance < s.inelastic_variance && s.valley_energy_fraction >= kValleyShareFloor &&
                        std::abs(s.valley_energy_fraction - kFleet100ValleyShare) <= 1e-6 && peak_rise <= 0.01;
        verdict(6, ok,
                fmt("variance %.1f -> %.1f, valley-third share %.3f, peak rise %.2e", s.inelastic_variance,
                    s.combined_variance, s.valley_energy_fraction, peak_rise));
    }

    // 7. packet drops
    verdict(7, faulted.back() <= 5e-3,
            fmt("p=0.05 over 8 seeds: final rel_obj min %.2e median %.2e max %.2e", faulted.front(),
                0.5 * (faulted[3] + faulted[4]), faulted.back()));

    return failures == 0 ? 0 : 1;
}
