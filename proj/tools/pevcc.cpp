// pevcc: generate scenarios, solve them centrally, run the distributed
// consensus+innovation algorithm and compare the two.

#include "pevcc/artifacts.hpp"
#include "pevcc/ci_solver.hpp"
#include "pevcc/errors.hpp"
#include "pevcc/metrics.hpp"
#include "pevcc/reference.hpp"
#include "pevcc/scenario.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace pevcc;

namespace {

struct TopologyChoice {
    std::string text;

    // Overrides the scenario's topology section when set.
    void apply(Scenario& s) const
    {
        if (text.empty())
            return;
        if (text == "path") {
            s.topology = {TopologyKind::path, {}};
        } else if (text == "ring") {
            s.topology = {TopologyKind::ring, {}};
        } else if (text.rfind("file:", 0) == 0) {
            s.topology = {TopologyKind::custom, read_edge_list(text.substr(5))};
        } else {
            throw InvalidInput("--topology must be path, ring or file:PATH");
        }
    }
};

void print_residuals(const ResidualReport& r)
{
    std::cout << "  stationarity (load)     " << format_number(r.stationarity_load) << '\n'
              << "  stationarity (schedule) " << format_number(r.stationarity_schedule) << '\n'
              << "  load balance            " << format_number(r.load_balance) << '\n'
              << "  energy rows             " << format_number(r.primal_energy) << '\n'
              << "  power bounds            " << format_number(r.primal_bounds) << '\n'
              << "  dual negativity         " << format_number(r.dual_negativity) << '\n'
              << "  complementarity         " << format_number(r.complementarity) << '\n';
}

void print_valley(const char* label, const ValleyStats& v)
{
    std::cout << label << ": variance " << format_number(v.inelastic_variance) << " -> "
              << format_number(v.combined_variance) << ", peak " << format_number(v.inelastic_peak) << " -> "
              << format_number(v.combined_peak) << ", valley-third energy share "
              << format_number(v.valley_energy_fraction) << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Distributed coordinated PEV charging (consensus+innovation) toolkit"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic fleet scenario (JSON)");
    FleetGenParams gen_params;
    GenerateOptions gen_opts;
    std::uint64_t gen_seed = 42;
    std::string gen_out;
    std::string gen_dir = ".";
    gen->add_option("--size", gen_params.size, "number of PEVs")->capture_default_str();
    gen->add_option("--seed", gen_seed, "random seed")->capture_default_str();
    gen->add_option("--steps", gen_params.grid.steps, "time steps")->capture_default_str();
    gen->add_option("--delta-t", gen_params.grid.delta_t, "step length in hours")->capture_default_str();
    gen->add_option("--midday-prob", gen_params.midday_trip_probability,
                    "share of vehicles making a midday round trip instead of commuting")
        ->capture_default_str();
    gen->add_option("--pev-share", gen_opts.pev_share, "PEV share of total demand")->capture_default_str();
    gen->add_option("--b-tilde", gen_opts.b_tilde, "quadratic serving-cost coefficient")->capture_default_str();
    gen->add_option("--name", gen_opts.name, "scenario name")->capture_default_str();
    gen->add_option("--out-dir", gen_dir, "directory for scenario.json")->capture_default_str();
    gen->add_option("--output", gen_out, "explicit output file (overrides --out-dir)");

    // shared scenario options
    std::string scenario_path;
    std::string out_dir = "out";

    auto* central = app.add_subcommand("solve-central", "solve the centralized problem and certify it");
    std::string method = "interior-point";
    central->add_option("--scenario", scenario_path, "scenario JSON")->required();
    central->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    central->add_option("--method", method, "interior-point or block-descent")
        ->check(CLI::IsMember({"interior-point", "block-descent"}))
        ->capture_default_str();

    auto* dist = app.add_subcommand("run-distributed", "run the distributed algorithm");
    std::optional<long> iters;
    TopologyChoice topo_choice;
    double drop_prob = 0.0;
    std::optional<std::uint64_t> fault_seed;
    std::string mode_text;
    std::optional<double> tol_consensus;
    std::optional<double> tol_kkt;
    std::optional<int> threads;
    std::string oracle_dir;
    bool no_oracle = false;
    dist->add_option("--scenario", scenario_path, "scenario JSON")->required();
    dist->add_option("--iters", iters, "run exactly this many rounds unless a --tol-* flag is also given");
    dist->add_option("--topology", topo_choice.text, "path, ring or file:PATH (edge list)");
    dist->add_option("--drop-prob", drop_prob, "per-link per-round drop probability")->capture_default_str();
    dist->add_option("--seed", fault_seed, "link-fault seed (default: scenario seed)");
    dist->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    dist->add_option("--mode", mode_text, "parallel or serial")->check(CLI::IsMember({"parallel", "serial"}));
    dist->add_option("--tol-consensus", tol_consensus, "stop tolerance on price disagreement");
    dist->add_option("--tol-kkt", tol_kkt, "stop tolerance on the per-agent KKT residual");
    dist->add_option("--threads", threads, "worker threads in parallel mode");
    dist->add_option("--oracle", oracle_dir, "solve-central output to measure against (default: solve now)");
    dist->add_flag("--no-oracle", no_oracle, "skip the central solve; rel_obj/rel_load become nan");

    auto* cmp = app.add_subcommand("compare", "compare a distributed run against a central solution");
    std::string run_dir;
    cmp->add_option("--scenario", scenario_path, "scenario JSON")->required();
    cmp->add_option("--oracle", oracle_dir, "solve-central output directory")->required();
    cmp->add_option("--run", run_dir, "run-distributed output directory")->required();
    cmp->add_option("--out-dir", out_dir, "output directory")->capture_default_str();

    auto* diam = app.add_subcommand("diameter", "print communication-graph diagnostics");
    int diam_size = 0;
    diam->add_option("--scenario", scenario_path, "scenario JSON (agent count and topology)");
    diam->add_option("--size", diam_size, "agent count when no scenario is given");
    diam->add_option("--topology", topo_choice.text, "path, ring or file:PATH");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            const Scenario s = generate_scenario(gen_params, gen_seed, gen_opts);
            const fs::path file = gen_out.empty() ? fs::path(gen_dir) / "scenario.json" : fs::path(gen_out);
            if (file.has_parent_path())
                fs::create_directories(file.parent_path());
            save_scenario(s, file);
            std::cout << "wrote " << file.string() << " (" << s.fleet.size() << " PEVs, T=" << s.grid.steps << ")\n";
            return 0;
        }

        if (*central) {
            const Scenario s = load_scenario(scenario_path);
            const Problem p = build_problem(s);
            const auto t0 = std::chrono::steady_clock::now();
            const CentralSolution sol =
                method == "block-descent" ? solve_centralized_block_descent(p) : solve_centralized(p);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const ResidualReport r = kkt_residual(p, sol);
            write_solution(out_dir, p, sol, r);
            std::cout << "f* = " << format_number(sol.objective_star) << " (" << sol.method << ", "
                      << sol.iterations << " iterations, " << secs << " s)\n"
                      << "KKT residuals (max norm):\n";
            print_residuals(r);
            std::cout << "max residual " << format_number(r.max()) << "\nwrote " << out_dir << '\n';
            return 0;
        }

        if (*dist) {
            Scenario s = load_scenario(scenario_path);
            topo_choice.apply(s);
            if (iters) {
                s.solver.max_iterations = *iters;
                s.solver.stop_on_tolerance = tol_consensus.has_value() || tol_kkt.has_value();
            }
            if (tol_consensus)
                s.solver.tol.consensus = *tol_consensus;
            if (tol_kkt)
                s.solver.tol.kkt = *tol_kkt;
            if (!mode_text.empty())
                s.solver.mode = mode_text == "serial" ? UpdateMode::serial : UpdateMode::parallel;
            if (threads)
                s.solver.threads = *threads;

            const Problem p = build_problem(s);
            const Topology topo = scenario_topology(s);
            const SolverConfig cfg = solver_config(s, p, topo);

            RunOptions opts;
            if (drop_prob > 0.0)
                opts.faults = LinkFaultModel{drop_prob, fault_seed.value_or(s.seed)};
            if (!oracle_dir.empty()) {
                const auto stored = read_solution(oracle_dir);
                opts.oracle = OracleReference{stored.objective, stored.load};
            } else if (!no_oracle) {
                const auto sol = solve_centralized(p);
                opts.oracle = OracleReference{sol.objective_star, sol.load_star};
            }

            fs::create_directories(out_dir);
            TraceWriter trace(out_dir);
            opts.sink = trace.sink();
            const auto t0 = std::chrono::steady_clock::now();
            const RunResult res = run(p, topo, cfg, opts);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

            std::vector<Vec> schedules;
            for (const auto& a : res.agents)
                schedules.push_back(a.x);
            write_schedules_csv(fs::path(out_dir) / "schedules.csv", schedules);
            {
                std::ofstream agents(fs::path(out_dir) / "agents.csv", std::ios::binary);
                agents << "pev_id,energy_kwh,local_residual\n";
                for (int v = 0; v < p.fleet_size(); ++v)
                    agents << v << ',' << format_number(res.agents[v].x.sum() * p.grid.delta_t) << ','
                           << format_number(local_residual(p, v, res.agents[v])) << '\n';
            }
            std::cout << "stopped after " << res.iterations << " iterations (" << to_string(res.reason) << ", "
                      << secs << " s)\n"
                      << "rel_obj " << format_number(res.last.rel_obj) << ", rel_load "
                      << format_number(res.last.rel_load) << ", consensus disagreement "
                      << format_number(res.last.consensus_disagreement) << ", KKT residual "
                      << format_number(res.last.max_kkt_residual) << "\nwrote " << out_dir << '\n';
            return 0;
        }

        if (*cmp) {
            const Scenario s = load_scenario(scenario_path);
            const Problem p = build_problem(s);
            const auto oracle = read_solution(oracle_dir);
            const auto progress = read_progress_csv(fs::path(run_dir) / "progress.csv");
            std::vector<ConvergenceSample> samples;
            for (const auto& row : progress)
                samples.push_back({row.iteration, rel_obj(row.objective, oracle.objective),
                                   rel_load(row.total_energy, oracle.load), row.consensus_disagreement,
                                   row.max_kkt_residual});
            write_convergence_csv(fs::path(out_dir) / "convergence.csv", samples);

            const auto schedules = read_schedules_csv(fs::path(run_dir) / "schedules.csv");
            require_size(static_cast<long>(schedules.size()), p.fleet_size(), "run schedules");
            const ValleyStats vo = valley_filling_stats(oracle.load, p.cost.inelastic_load_kw);
            const ValleyStats vr = valley_filling_stats(total_load(schedules), p.cost.inelastic_load_kw);
            {
                std::ofstream out(fs::path(out_dir) / "valley.csv", std::ios::binary);
                out << "source,inelastic_variance,combined_variance,inelastic_peak,combined_peak,"
                       "valley_energy_fraction\n";
                for (auto [name, v] : {std::pair{"oracle", vo}, std::pair{"run", vr}})
                    out << name << ',' << format_number(v.inelastic_variance) << ','
                        << format_number(v.combined_variance) << ',' << format_number(v.inelastic_peak) << ','
                        << format_number(v.combined_peak) << ',' << format_number(v.valley_energy_fraction)
                        << '\n';
            }
            if (samples.empty())
                throw Error("run has no iterations");
            const auto& last = samples.back();
            std::cout << "final iteration " << last.iteration << ": rel_obj " << format_number(last.rel_obj)
                      << ", rel_load " << format_number(last.rel_load) << '\n';
            print_valley("oracle", vo);
            print_valley("run", vr);
            std::cout << "wrote " << out_dir << '\n';
            return 0;
        }

        if (*diam) {
            Scenario s;
            int agents = diam_size;
            if (!scenario_path.empty()) {
                s = load_scenario(scenario_path);
                agents = static_cast<int>(s.fleet.size());
            }
            if (agents < 1)
                throw InvalidInput("give --scenario or --size");
            topo_choice.apply(s);
            const Topology t = build_topology(s.topology.kind, agents, s.topology.edges);
            std::cout << "agents " << t.num_agents() << "\nedges " << t.edges().size() << "\nmax_degree "
                      << t.max_degree() << "\ndiameter " << graph_diameter(t) << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
