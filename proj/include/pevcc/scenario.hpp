#pragma once

#include "pevcc/ci_solver.hpp"
#include "pevcc/cost.hpp"
#include "pevcc/fleet.hpp"
#include "pevcc/network.hpp"
#include "pevcc/problem.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pevcc {

enum class ScalingMode { none, pev_share };

struct CostSpec {
    double a_tilde = 0.0;
    double b_tilde = 1e-3;
    Vec inelastic_load_kw;  // base profile; scaled at resolution time under pev_share
    ScalingMode scaling = ScalingMode::none;
    double pev_share = 0.1;
};

struct TopologySpec {
    TopologyKind kind = TopologyKind::path;
    std::vector<Edge> edges;  // custom only
};

struct SolverSpec {
    long max_iterations = 10000;
    StopTolerances tol;
    bool stop_on_tolerance = true;
    UpdateMode mode = UpdateMode::parallel;
    int threads = 1;
    std::optional<TuningSchedule> schedule;  // suggest_schedule() when absent
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    TimeGrid grid;
    std::vector<PevSpec> fleet;
    CostSpec cost;
    TopologySpec topology;
    SolverSpec solver;

    void validate() const;
};

bool operator==(const Scenario& a, const Scenario& b);

std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text, const std::string& origin = "<string>");
Scenario load_scenario(const std::filesystem::path& file);
void save_scenario(const Scenario& s, const std::filesystem::path& file);

// Fixed c1, c2 after applying the scaling mode.
CostModel resolve_cost(const Scenario& s);
Problem build_problem(const Scenario& s);
Topology scenario_topology(const Scenario& s);
SolverConfig solver_config(const Scenario& s, const Problem& problem, const Topology& topology);

struct GenerateOptions {
    double b_tilde = 1e-3;
    double a_tilde = 0.0;
    double pev_share = 0.1;
    double tau_alpha = 0.3;
    double tau_beta = 0.2;
    double tau_gamma = 0.05;
    long max_iterations = 10000;
    std::string name = "synthetic";
};

// Synthetic fleet + winter profile scaled to the PEV share + suggested tuning.
Scenario generate_scenario(const FleetGenParams& params, std::uint64_t seed, const GenerateOptions& options = {});

}  // namespace pevcc
