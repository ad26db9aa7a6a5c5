#include "pevcc/ci_solver.hpp"
#include "pevcc/errors.hpp"
#include "pevcc/metrics.hpp"
#include "pevcc/reference.hpp"
#include "pevcc/scenario.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace pevcc;

namespace {

py::dict record_dict(const IterationRecord& r)
{
    py::dict d;
    d["iteration"] = r.iteration;
    d["objective"] = r.objective;
    d["total_energy"] = r.total_energy;
    d["rel_obj"] = r.rel_obj;
    d["rel_load"] = r.rel_load;
    d["consensus_disagreement"] = r.consensus_disagreement;
    d["max_kkt_residual"] = r.max_kkt_residual;
    d["max_local_residual"] = r.max_local_residual;
    return d;
}

std::vector<Vec> pick(const std::vector<AgentState>& agents, Vec AgentState::*field)
{
    std::vector<Vec> out;
    out.reserve(agents.size());
    for (const auto& a : agents)
        out.push_back(a.*field);
    return out;
}

py::dict run_distributed(const Problem& problem, const Topology& topology, const SolverConfig& config,
                         const CentralSolution* oracle, double drop_probability, std::uint64_t seed, bool trace)
{
    RunOptions options;
    if (oracle)
        options.oracle = OracleReference{oracle->objective_star, oracle->load_star};
    if (drop_probability > 0.0)
        options.faults = LinkFaultModel{drop_probability, seed};
    std::vector<IterationRecord> records;
    if (trace)
        options.sink = [&](const IterationRecord& r, const std::vector<AgentState>&) { records.push_back(r); };

    RunResult result;
    {
        py::gil_scoped_release release;
        result = run(problem, topology, config, options);
    }
    py::dict out;
    out["iterations"] = result.iterations;
    out["stop_reason"] = to_string(result.reason);
    out["last"] = record_dict(result.last);
    out["schedules"] = pick(result.agents, &AgentState::x);
    out["load_estimates"] = pick(result.agents, &AgentState::load_estimate);
    out["prices"] = pick(result.agents, &AgentState::lambda);
    out["energy_multipliers"] = pick(result.agents, &AgentState::mu);
    if (trace) {
        py::list rows;
        for (const auto& r : records)
            rows.append(record_dict(r));
        out["trace"] = rows;
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_pevcc, m)
{
    m.doc() = "Distributed PEV charging coordination";

    static py::exception<Error> base(m, "Error");
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
    py::register_exception<InfeasibleProblem>(m, "InfeasibleProblem", base.ptr());
    py::register_exception<TopologyError>(m, "TopologyError", base.ptr());
    py::register_exception<NotConverged>(m, "NotConverged", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());

    py::class_<Scenario>(m, "Scenario")
        .def_readwrite("name", &Scenario::name)
        .def_readonly("seed", &Scenario::seed)
        .def_property_readonly("fleet_size", [](const Scenario& s) { return s.fleet.size(); })
        .def_property_readonly("steps", [](const Scenario& s) { return s.grid.steps; })
        .def_property_readonly("delta_t", [](const Scenario& s) { return s.grid.delta_t; })
        .def("to_json", &scenario_to_json)
        .def("save", [](const Scenario& s, const std::filesystem::path& p) { save_scenario(s, p); })
        .def("__eq__", [](const Scenario& a, const Scenario& b) { return a == b; });

    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("scenario_from_json", &scenario_from_json, py::arg("text"), py::arg("origin") = "<string>");
    m.def(
        "generate_scenario",
        [](int size, std::uint64_t seed, const std::string& name) {
            FleetGenParams p;
            p.size = size;
            GenerateOptions o;
            o.name = name;
            return generate_scenario(p, seed, o);
        },
        py::arg("size") = 100, py::arg("seed") = 42, py::arg("name") = "synthetic");

    py::class_<Problem>(m, "Problem")
        .def_property_readonly("fleet_size", &Problem::fleet_size)
        .def_property_readonly("steps", &Problem::steps)
        .def_property_readonly("c1", [](const Problem& p) { return p.cost.c1; })
        .def_property_readonly("c2", [](const Problem& p) { return p.cost.c2; })
        .def_property_readonly("inelastic_load", [](const Problem& p) { return p.cost.inelastic_load_kw; })
        .def("objective", [](const Problem& p, const Vec& load) { return evaluate_objective(p.cost, load); });
    m.def("build_problem", &build_problem, py::arg("scenario"));

    py::class_<Topology>(m, "Topology")
        .def(py::init<int, const std::vector<Edge>&>(), py::arg("num_agents"), py::arg("edges"))
        .def_static("path", &Topology::path)
        .def_static("ring", &Topology::ring)
        .def_static("complete", &Topology::complete)
        .def_property_readonly("num_agents", &Topology::num_agents)
        .def_property_readonly("max_degree", &Topology::max_degree)
        .def("edges", &Topology::edges)
        .def("neighbors", &Topology::neighbors)
        .def("diameter", &graph_diameter);
    m.def("scenario_topology", &scenario_topology, py::arg("scenario"));

    py::class_<CentralSolution>(m, "CentralSolution")
        .def_readonly("x_star", &CentralSolution::x_star)
        .def_readonly("load_star", &CentralSolution::load_star)
        .def_readonly("lambda_star", &CentralSolution::lambda_star)
        .def_readonly("mu_star", &CentralSolution::mu_star)
        .def_readonly("objective_star", &CentralSolution::objective_star)
        .def_readonly("iterations", &CentralSolution::iterations)
        .def_readonly("method", &CentralSolution::method);
    m.def(
        "solve_centralized",
        [](const Problem& p, const std::string& method) {
            py::gil_scoped_release release;
            if (method == "ipm")
                return solve_centralized(p);
            if (method == "block_descent")
                return solve_centralized_block_descent(p);
            throw InvalidInput("method must be 'ipm' or 'block_descent', got '" + method + "'");
        },
        py::arg("problem"), py::arg("method") = "ipm");
    m.def(
        "kkt_residual",
        [](const Problem& p, const CentralSolution& s) {
            const auto r = kkt_residual(p, s);
            py::dict d;
            d["stationarity_load"] = r.stationarity_load;
            d["stationarity_schedule"] = r.stationarity_schedule;
            d["load_balance"] = r.load_balance;
            d["primal_energy"] = r.primal_energy;
            d["primal_bounds"] = r.primal_bounds;
            d["dual_negativity"] = r.dual_negativity;
            d["complementarity"] = r.complementarity;
            d["max"] = r.max();
            return d;
        },
        py::arg("problem"), py::arg("solution"));

    py::class_<TuningSchedule>(m, "TuningSchedule")
        .def(py::init<>())
        .def_readwrite("alpha0", &TuningSchedule::alpha0)
        .def_readwrite("beta0", &TuningSchedule::beta0)
        .def_readwrite("tau_alpha", &TuningSchedule::tau_alpha)
        .def_readwrite("tau_beta", &TuningSchedule::tau_beta)
        .def_readwrite("gamma", &TuningSchedule::gamma)
        .def_readwrite("delta", &TuningSchedule::delta)
        .def_readwrite("tau_gamma", &TuningSchedule::tau_gamma);
    m.def("suggest_schedule", &suggest_schedule, py::arg("problem"), py::arg("topology"), py::arg("tau_alpha") = 0.3,
          py::arg("tau_beta") = 0.2, py::arg("tau_gamma") = 0.05);

    py::enum_<UpdateMode>(m, "UpdateMode").value("parallel", UpdateMode::parallel).value("serial", UpdateMode::serial);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("max_iterations", &SolverConfig::max_iterations)
        .def_readwrite("stop_on_tolerance", &SolverConfig::stop_on_tolerance)
        .def_readwrite("schedule", &SolverConfig::schedule)
        .def_readwrite("mode", &SolverConfig::mode)
        .def_readwrite("threads", &SolverConfig::threads)
        .def_property(
            "tol_consensus", [](const SolverConfig& c) { return c.tol.consensus; },
            [](SolverConfig& c, double v) { c.tol.consensus = v; })
        .def_property(
            "tol_kkt", [](const SolverConfig& c) { return c.tol.kkt; }, [](SolverConfig& c, double v) { c.tol.kkt = v; });
    m.def("solver_config", &solver_config, py::arg("scenario"), py::arg("problem"), py::arg("topology"));

    m.def("run_distributed", &run_distributed, py::arg("problem"), py::arg("topology"), py::arg("config"),
          py::arg("oracle") = nullptr, py::arg("drop_probability") = 0.0, py::arg("seed") = 0,
          py::arg("trace") = false);

    m.def("rel_obj", &rel_obj, py::arg("f"), py::arg("f_star"));
    m.def("rel_load", py::overload_cast<const std::vector<Vec>&, const Vec&>(&rel_load), py::arg("schedules"),
          py::arg("load_star"));
    m.def(
        "valley_filling_stats",
        [](const Vec& pev_load, const Vec& inelastic) {
            const auto s = valley_filling_stats(pev_load, inelastic);
            py::dict d;
            d["inelastic_variance"] = s.inelastic_variance;
            d["combined_variance"] = s.combined_variance;
            d["inelastic_peak"] = s.inelastic_peak;
            d["combined_peak"] = s.combined_peak;
            d["valley_energy_fraction"] = s.valley_energy_fraction;
            return d;
        },
        py::arg("pev_load"), py::arg("inelastic"));
}
