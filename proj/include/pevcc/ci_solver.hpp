#pragma once

#include "pevcc/network.hpp"
#include "pevcc/problem.hpp"
#include "pevcc/reference.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pevcc {

struct AgentState {
    Vec x;              // own charging schedule, kW
    Vec load_estimate;  // own estimate of the fleet load
    Vec lambda;         // own price estimate
    Vec mu;             // multipliers of the 2T+2 energy rows
};

// alpha_k = alpha0 / (k+1)^tau_alpha (innovation), beta_k = beta0 / (k+1)^tau_beta
// (consensus), gamma_k = gamma / (k+1)^tau_gamma (energy multipliers), delta constant.
struct TuningSchedule {
    double alpha0 = 1.0;
    double beta0 = 1.0;
    double tau_alpha = 0.6;
    double tau_beta = 0.51;
    double gamma = 1.0;
    double delta = 1.0;
    double tau_gamma = 0.0;  // 0 keeps gamma constant

    void validate() const;
};

struct StepSizes {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double delta = 0.0;
};

StepSizes step_sizes(const TuningSchedule& sched, long k);

// Scale-aware defaults: with m = 2 c1 V and s = 2 T (efficiency dt)^2,
// alpha0 = m/2, delta = 0.1/m, gamma = 0.05 m/s, beta0 = 0.9/max_degree.
TuningSchedule suggest_schedule(const Problem& problem, const Topology& topology, double tau_alpha = 0.3,
                                double tau_beta = 0.2, double tau_gamma = 0.05);

enum class UpdateMode { parallel, serial };

struct StopTolerances {
    double consensus = 1e-5;
    double kkt = 1e-3;
};

struct SolverConfig {
    long max_iterations = 10000;
    StopTolerances tol;
    bool stop_on_tolerance = true;  // false runs exactly max_iterations rounds
    TuningSchedule schedule;
    UpdateMode mode = UpdateMode::parallel;
    int threads = 1;  // parallel mode only

    void validate() const;
};

// Single-agent updates. Every function reads only the given state.
Vec lambda_update(const AgentState& state, const std::vector<Vec>& neighbor_lambdas, int fleet_size,
                  const StepSizes& steps);
Vec lambda_update(const AgentState& state, const std::vector<Vec>& neighbor_lambdas, int fleet_size, long k,
                  const TuningSchedule& sched);
Vec load_estimate_update(const AgentState& state, const CostModel& cost);
Vec schedule_update(const AgentState& state, const EnergyConstraintSet& cons, const PowerBounds& bounds,
                    double delta);
Vec schedule_update(const AgentState& state, const EnergyConstraintSet& cons, const PowerBounds& bounds,
                    const TuningSchedule& sched);
Vec mu_update(const AgentState& state, const EnergyConstraintSet& cons, double gamma);
Vec mu_update(const AgentState& state, const EnergyConstraintSet& cons, const TuningSchedule& sched);

// Price at c2, everything else zero.
std::vector<AgentState> initial_states(const Problem& problem);

// Clamped KKT residual computable by agent v alone: projected-gradient residual
// of x, energy-row violation, complementarity max|min(mu, b - A x)| and the
// load-estimate consistency.
double local_residual(const Problem& problem, int v, const AgentState& state);

// Central candidate from agent states: mean price, mean load estimate, own x and mu.
CentralSolution assemble_candidate(const Problem& problem, const std::vector<AgentState>& agents);

struct IterationRecord {
    long iteration = 0;  // 1-based count of completed rounds
    double objective = 0.0;      // f evaluated at the summed schedules
    double total_energy = 0.0;   // sum over agents and steps of x
    double rel_obj = 0.0;        // NaN without an oracle
    double rel_load = 0.0;
    double consensus_disagreement = 0.0;
    double max_kkt_residual = 0.0;  // assembled central residual
    double max_local_residual = 0.0;
};

struct OracleReference {
    double objective = 0.0;
    Vec load;
};

using TraceSink = std::function<void(const IterationRecord&, const std::vector<AgentState>&)>;
using MessageObserver = std::function<void(long round, int receiver, const std::vector<PriceMessage>&)>;

struct RunOptions {
    std::optional<LinkFaultModel> faults;
    std::optional<OracleReference> oracle;
    TraceSink sink;
    MessageObserver observer;
    std::vector<AgentState> warm_start;
};

enum class StopReason { tolerance, max_iterations };
std::string to_string(StopReason reason);

struct RunResult {
    std::vector<AgentState> agents;
    long iterations = 0;
    StopReason reason = StopReason::max_iterations;
    IterationRecord last;
};

RunResult run(const Problem& problem, const Topology& topology, const SolverConfig& config,
              const RunOptions& options = {});

}  // namespace pevcc
