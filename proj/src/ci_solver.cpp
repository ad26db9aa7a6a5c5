#include "pevcc/ci_solver.hpp"

#include "pevcc/errors.hpp"
#include "pevcc/metrics.hpp"

#include <algorithm>
#include <barrier>
#include <cmath>
#include <limits>
#include <thread>

namespace pevcc {

void TuningSchedule::validate() const
{
    if (!(alpha0 > 0.0 && beta0 > 0.0))
        throw InvalidInput("schedule: alpha0 and beta0 must be > 0");
    if (!(tau_beta > 0.0 && tau_beta < tau_alpha && tau_alpha <= 1.0))
        throw InvalidInput("schedule: need 0 < tau_beta < tau_alpha <= 1");
    if (!(gamma > 0.0 && delta > 0.0))
        throw InvalidInput("schedule: gamma and delta must be > 0");
    if (!(tau_gamma >= 0.0 && tau_gamma <= 1.0))
        throw InvalidInput("schedule: need 0 <= tau_gamma <= 1");
}

StepSizes step_sizes(const TuningSchedule& sched, long k)
{
    if (k < 0)
        throw InvalidInput("step_sizes: iteration index must be >= 0");
    const double kp1 = static_cast<double>(k) + 1.0;
    return {sched.alpha0 / std::pow(kp1, sched.tau_alpha), sched.beta0 / std::pow(kp1, sched.tau_beta),
            sched.tau_gamma > 0.0 ? sched.gamma / std::pow(kp1, sched.tau_gamma) : sched.gamma, sched.delta};
}

TuningSchedule suggest_schedule(const Problem& problem, const Topology& topology, double tau_alpha,
                                double tau_beta, double tau_gamma)
{
    double gain = 0.0;
    for (const auto& v : problem.vehicles)
        gain = std::max(gain, v.energy.a.gain());
    const double m = 2.0 * problem.cost.c1 * problem.fleet_size();
    const double s = 2.0 * problem.steps() * gain * gain;
    TuningSchedule sched;
    sched.tau_alpha = tau_alpha;
    sched.tau_beta = tau_beta;
    sched.tau_gamma = tau_gamma;
    sched.alpha0 = 0.5 * m;
    sched.delta = 0.1 / m;
    sched.gamma = 0.05 * m / s;
    sched.beta0 = topology.max_degree() > 0 ? 0.9 / topology.max_degree() : 0.45;
    sched.validate();
    return sched;
}

void SolverConfig::validate() const
{
    if (max_iterations < 1)
        throw InvalidInput("max_iterations must be >= 1");
    if (!(tol.consensus > 0.0 && tol.kkt > 0.0))
        throw InvalidInput("stop tolerances must be > 0");
    if (threads < 1)
        throw InvalidInput("threads must be >= 1");
    schedule.validate();
}

namespace {

void check_state(const AgentState& s, long T)
{
    require_size(s.x.size(), T, "x");
    require_size(s.load_estimate.size(), T, "load_estimate");
    require_size(s.lambda.size(), T, "lambda");
    require_size(s.mu.size(), 2 * T + 2, "mu");
}

// lambda - beta * (n * lambda - sum_w lambda_w) - alpha * (L / V - x)
void lambda_into(Vec& out, const AgentState& s, const Vec& neighbor_sum, int neighbor_count, int fleet_size,
                 double alpha, double beta)
{
    const double inv_v = 1.0 / fleet_size;
    out = s.lambda - beta * (neighbor_count * s.lambda - neighbor_sum) - alpha * (inv_v * s.load_estimate - s.x);
}

void load_into(Vec& out, const Vec& lambda, const CostModel& cost)
{
    out = ((lambda - cost.c2) / (2.0 * cost.c1)).cwiseMax(0.0);
}

void schedule_into(Vec& out, const Vec& x, const Vec& lambda, const Vec& mu, const EnergyConstraintSet& cons,
                   const PowerBounds& bounds, double delta, Vec& work)
{
    work = lambda;
    cons.a.apply_transpose_add(mu, work);
    out = (x - delta * work).cwiseMax(bounds.lower).cwiseMin(bounds.upper);
}

void mu_into(Vec& out, const Vec& mu, const Vec& x, const EnergyConstraintSet& cons, double gamma)
{
    out = (mu + gamma * (cons.a.apply(x) - cons.b)).cwiseMax(0.0);
}

Vec sum_of(const std::vector<Vec>& vs, long T)
{
    Vec acc = Vec::Zero(T);
    for (const auto& v : vs) {
        require_size(v.size(), T, "neighbor lambda");
        acc += v;
    }
    return acc;
}

}  // namespace

Vec lambda_update(const AgentState& state, const std::vector<Vec>& neighbor_lambdas, int fleet_size,
                  const StepSizes& steps)
{
    if (fleet_size <= 0)
        throw InvalidInput("lambda_update: fleet size must be > 0");
    const long T = state.lambda.size();
    require_size(state.x.size(), T, "x");
    require_size(state.load_estimate.size(), T, "load_estimate");
    Vec out;
    lambda_into(out, state, sum_of(neighbor_lambdas, T), static_cast<int>(neighbor_lambdas.size()), fleet_size,
                steps.alpha, steps.beta);
    return out;
}

Vec lambda_update(const AgentState& state, const std::vector<Vec>& neighbor_lambdas, int fleet_size, long k,
                  const TuningSchedule& sched)
{
    return lambda_update(state, neighbor_lambdas, fleet_size, step_sizes(sched, k));
}

Vec load_estimate_update(const AgentState& state, const CostModel& cost)
{
    require_size(state.lambda.size(), cost.c2.size(), "lambda");
    if (!(cost.c1 > 0.0))
        throw InvalidInput("load_estimate_update: c1 must be > 0");
    Vec out;
    load_into(out, state.lambda, cost);
    return out;
}

Vec schedule_update(const AgentState& state, const EnergyConstraintSet& cons, const PowerBounds& bounds,
                    double delta)
{
    const long T = cons.a.steps();
    require_size(state.x.size(), T, "x");
    require_size(state.lambda.size(), T, "lambda");
    require_size(state.mu.size(), cons.a.rows(), "mu");
    require_size(bounds.lower.size(), T, "lower bound");
    require_size(bounds.upper.size(), T, "upper bound");
    Vec out;
    Vec work;
    schedule_into(out, state.x, state.lambda, state.mu, cons, bounds, delta, work);
    return out;
}

Vec schedule_update(const AgentState& state, const EnergyConstraintSet& cons, const PowerBounds& bounds,
                    const TuningSchedule& sched)
{
    return schedule_update(state, cons, bounds, sched.delta);
}

Vec mu_update(const AgentState& state, const EnergyConstraintSet& cons, double gamma)
{
    require_size(state.mu.size(), cons.a.rows(), "mu");
    require_size(state.x.size(), cons.a.steps(), "x");
    Vec out;
    mu_into(out, state.mu, state.x, cons, gamma);
    return out;
}

Vec mu_update(const AgentState& state, const EnergyConstraintSet& cons, const TuningSchedule& sched)
{
    return mu_update(state, cons, sched.gamma);
}

std::vector<AgentState> initial_states(const Problem& problem)
{
    const int T = problem.steps();
    AgentState s{Vec::Zero(T), Vec::Zero(T), problem.cost.c2, Vec::Zero(2 * T + 2)};
    return std::vector<AgentState>(problem.vehicles.size(), s);
}

double local_residual(const Problem& problem, int v, const AgentState& s)
{
    const auto& veh = problem.vehicles.at(v);
    Vec g = s.lambda;
    veh.energy.a.apply_transpose_add(s.mu, g);
    const Vec projected = (s.x - g).cwiseMax(veh.power.lower).cwiseMin(veh.power.upper);
    const Vec slack = veh.energy.b - veh.energy.a.apply(s.x);
    Vec load;
    load_into(load, s.lambda, problem.cost);
    return std::max({(s.x - projected).cwiseAbs().maxCoeff(), std::max(0.0, -slack.minCoeff()),
                     s.mu.cwiseMin(slack).cwiseAbs().maxCoeff(), (s.load_estimate - load).cwiseAbs().maxCoeff()});
}

CentralSolution assemble_candidate(const Problem& problem, const std::vector<AgentState>& agents)
{
    const int V = problem.fleet_size();
    const int T = problem.steps();
    require_size(static_cast<long>(agents.size()), V, "agent states");
    CentralSolution sol;
    sol.method = "distributed";
    sol.lambda_star = Vec::Zero(T);
    sol.load_star = Vec::Zero(T);
    for (const auto& a : agents) {
        check_state(a, T);
        sol.x_star.push_back(a.x);
        sol.mu_star.push_back(a.mu);
        sol.lambda_star += a.lambda / V;
        sol.load_star += a.load_estimate / V;
    }
    sol.objective_star = evaluate_objective(problem.cost, total_load(sol.x_star));
    recover_bound_multipliers(problem, sol);
    return sol;
}

std::string to_string(StopReason reason)
{
    return reason == StopReason::tolerance ? "tolerance" : "max_iterations";
}

namespace {

// Same quantities as kkt_residual(assemble_candidate(...)) without building the candidate.
double assembled_residual(const Problem& problem, const std::vector<AgentState>& agents, Vec& work)
{
    const int V = problem.fleet_size();
    const int T = problem.steps();
    Vec price = Vec::Zero(T);
    Vec load = Vec::Zero(T);
    Vec sum = Vec::Zero(T);
    for (const auto& a : agents) {
        price += a.lambda;
        load += a.load_estimate;
        sum += a.x;
    }
    price /= V;
    load /= V;
    double r = (2.0 * problem.cost.c1 * load + problem.cost.c2 - price).cwiseAbs().maxCoeff();
    r = std::max(r, (load - sum).cwiseAbs().maxCoeff());
    for (int v = 0; v < V; ++v) {
        const auto& veh = problem.vehicles[v];
        const auto& a = agents[v];
        work = price;
        veh.energy.a.apply_transpose_add(a.mu, work);
        for (int t = 0; t < T; ++t) {
            const double lo = veh.power.lower[t];
            const double up = veh.power.upper[t];
            const double x = a.x[t];
            const double g = work[t];
            const bool at_lo = x - lo <= kActiveBoundTolerance * (1.0 + std::abs(lo));
            const bool at_up = up - x <= kActiveBoundTolerance * (1.0 + std::abs(up));
            double stat = std::abs(g);
            double comp = 0.0;
            if (at_lo && at_up) {
                stat = 0.0;
                comp = std::abs(g) * std::max(x - up, lo - x);
            } else if (at_lo) {
                stat = std::max(0.0, -g);
                comp = std::max(0.0, g) * std::abs(lo - x);
            } else if (at_up) {
                stat = std::max(0.0, g);
                comp = std::max(0.0, -g) * std::abs(x - up);
            }
            r = std::max({r, stat, comp, lo - x, x - up});
        }
        const Vec slack = veh.energy.a.apply(a.x) - veh.energy.b;
        r = std::max({r, slack.maxCoeff(), (-a.mu).maxCoeff(), a.mu.cwiseProduct(slack).cwiseAbs().maxCoeff()});
    }
    return std::max(0.0, r);
}

class WorkerPool {
public:
    WorkerPool(int threads, int items) : threads_(threads), items_(items), start_(threads), done_(threads)
    {
        for (int i = 1; i < threads_; ++i)
            workers_.emplace_back([this, i] {
                for (;;) {
                    start_.arrive_and_wait();
                    if (stop_)
                        return;
                    run_chunk(i);
                    done_.arrive_and_wait();
                }
            });
    }
    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    ~WorkerPool()
    {
        stop_ = true;
        start_.arrive_and_wait();
    }

    // Runs job(v) for every item, split into contiguous chunks; returns after all chunks finish.
    void for_each(const std::function<void(int)>& job)
    {
        job_ = &job;
        start_.arrive_and_wait();
        run_chunk(0);
        done_.arrive_and_wait();
    }

private:
    void run_chunk(int i)
    {
        const int begin = items_ * i / threads_;
        const int end = items_ * (i + 1) / threads_;
        for (int v = begin; v < end; ++v)
            (*job_)(v);
    }

    int threads_;
    int items_;
    bool stop_ = false;
    const std::function<void(int)>* job_ = nullptr;
    std::barrier<> start_;
    std::barrier<> done_;
    std::vector<std::jthread> workers_;
};

}  // namespace

RunResult run(const Problem& problem, const Topology& topology, const SolverConfig& config,
              const RunOptions& options)
{
    config.validate();
    const int V = problem.fleet_size();
    const int T = problem.steps();
    if (topology.num_agents() != V)
        throw TopologyError("topology has " + std::to_string(topology.num_agents()) + " agents, fleet has " +
                            std::to_string(V));
    {
        std::vector<PevSpec> specs;
        for (const auto& v : problem.vehicles)
            specs.push_back(v.spec);
        const auto report = validate_feasibility(specs, problem.grid);
        if (!report.all_feasible())
            throw InfeasibleProblem("scenario has infeasible PEV " + std::to_string(report.infeasible_ids().front()));
    }
    const LinkFaultModel* faults = nullptr;
    if (options.faults) {
        options.faults->validate();
        faults = &*options.faults;
    }
    if (options.oracle) {
        require_size(options.oracle->load.size(), T, "oracle load");
        if (options.oracle->objective == 0.0 || !(options.oracle->load.sum() > 0.0))
            throw InvalidInput("oracle reference has zero objective or zero total load");
    }

    std::vector<AgentState> cur = options.warm_start.empty() ? initial_states(problem) : options.warm_start;
    require_size(static_cast<long>(cur.size()), V, "warm start states");
    for (const auto& s : cur)
        check_state(s, T);
    std::vector<AgentState> next = cur;
    std::vector<Vec> prices(V);
    for (int v = 0; v < V; ++v)
        prices[v] = cur[v].lambda;

    const int threads = config.mode == UpdateMode::parallel ? std::min(config.threads, V) : 1;
    std::optional<WorkerPool> pool;
    if (threads > 1)
        pool.emplace(threads, V);
    std::vector<Vec> work(V, Vec::Zero(T));
    Vec residual_work(T);

    RunResult result;
    long k = 0;
    for (; k < config.max_iterations; ++k) {
        const StepSizes st = step_sizes(config.schedule, k);

        if (config.mode == UpdateMode::parallel) {
            const Inboxes inboxes = exchange_round(topology, faults, prices, k);
            if (options.observer)
                for (int v = 0; v < V; ++v)
                    options.observer(k, v, inboxes[v]);
            auto agent_round = [&](int v) {
                const auto& veh = problem.vehicles[v];
                const AgentState& s = cur[v];
                AgentState& out = next[v];
                Vec& acc = work[v];
                acc.setZero();
                for (const auto& msg : inboxes[v])
                    acc += *msg.price;
                lambda_into(out.lambda, s, acc, static_cast<int>(inboxes[v].size()), V, st.alpha, st.beta);
                load_into(out.load_estimate, s.lambda, problem.cost);
                schedule_into(out.x, s.x, s.lambda, s.mu, veh.energy, veh.power, st.delta, acc);
                mu_into(out.mu, s.mu, s.x, veh.energy, st.gamma);
            };
            if (pool)
                pool->for_each(agent_round);
            else
                for (int v = 0; v < V; ++v)
                    agent_round(v);
            std::swap(cur, next);
            for (int v = 0; v < V; ++v)
                prices[v] = cur[v].lambda;
        } else {
            for (int v = 0; v < V; ++v) {
                const auto inbox = deliver_to(topology, faults, prices, k, v);
                if (options.observer)
                    options.observer(k, v, inbox);
                const auto& veh = problem.vehicles[v];
                AgentState& s = cur[v];
                Vec& acc = work[v];
                acc.setZero();
                for (const auto& msg : inbox)
                    acc += *msg.price;
                Vec fresh;
                lambda_into(fresh, s, acc, static_cast<int>(inbox.size()), V, st.alpha, st.beta);
                s.lambda = fresh;
                load_into(s.load_estimate, s.lambda, problem.cost);
                Vec x_new;
                schedule_into(x_new, s.x, s.lambda, s.mu, veh.energy, veh.power, st.delta, acc);
                s.x = x_new;
                Vec mu_new;
                mu_into(mu_new, s.mu, s.x, veh.energy, st.gamma);
                s.mu = mu_new;
                prices[v] = s.lambda;
            }
        }

        IterationRecord rec;
        rec.iteration = k + 1;
        Vec sum = Vec::Zero(T);
        for (const auto& s : cur)
            sum += s.x;
        rec.objective = evaluate_objective(problem.cost, sum);
        rec.total_energy = sum.sum();
        if (options.oracle) {
            rec.rel_obj = rel_obj(rec.objective, options.oracle->objective);
            rec.rel_load = rel_load(rec.total_energy, options.oracle->load);
        } else {
            rec.rel_obj = std::numeric_limits<double>::quiet_NaN();
            rec.rel_load = std::numeric_limits<double>::quiet_NaN();
        }
        rec.consensus_disagreement = consensus_disagreement(topology, prices);
        rec.max_kkt_residual = assembled_residual(problem, cur, residual_work);
        for (int v = 0; v < V; ++v)
            rec.max_local_residual = std::max(rec.max_local_residual, local_residual(problem, v, cur[v]));
        if (options.sink)
            options.sink(rec, cur);
        result.last = rec;

        if (config.stop_on_tolerance && rec.consensus_disagreement <= config.tol.consensus &&
            rec.max_local_residual <= config.tol.kkt) {
            result.reason = StopReason::tolerance;
            ++k;
            break;
        }
    }
    result.iterations = k;
    if (result.reason != StopReason::tolerance)
        result.reason = StopReason::max_iterations;
    result.agents = std::move(cur);
    return result;
}

}  // namespace pevcc
