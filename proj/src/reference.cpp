#include "pevcc/reference.hpp"

#include "pevcc/errors.hpp"
#include "pevcc/qp.hpp"
#include "reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pevcc {

double ResidualReport::max() const
{
    return std::max({stationarity_load, stationarity_schedule, load_balance, primal_energy, primal_bounds,
                     dual_negativity, complementarity});
}

void recover_bound_multipliers(const Problem& problem, CentralSolution& sol, double active_tol)
{
    const int V = problem.fleet_size();
    const int T = problem.steps();
    require_size(static_cast<long>(sol.x_star.size()), V, "candidate schedules");
    require_size(static_cast<long>(sol.mu_star.size()), V, "candidate energy multipliers");
    require_size(sol.lambda_star.size(), T, "candidate price");
    sol.mu_plus_star.assign(V, Vec::Zero(T));
    sol.mu_minus_star.assign(V, Vec::Zero(T));
    for (int v = 0; v < V; ++v) {
        const auto& veh = problem.vehicles[v];
        const Vec& x = sol.x_star[v];
        Vec g = sol.lambda_star;
        veh.energy.a.apply_transpose_add(sol.mu_star[v], g);
        for (int t = 0; t < T; ++t) {
            const double lo = veh.power.lower[t];
            const double up = veh.power.upper[t];
            const bool at_lo = x[t] - lo <= active_tol * (1.0 + std::abs(lo));
            const bool at_up = up - x[t] <= active_tol * (1.0 + std::abs(up));
            if (at_lo && at_up) {
                if (g[t] >= 0.0)
                    sol.mu_minus_star[v][t] = g[t];
                else
                    sol.mu_plus_star[v][t] = -g[t];
            } else if (at_lo) {
                sol.mu_minus_star[v][t] = std::max(0.0, g[t]);
            } else if (at_up) {
                sol.mu_plus_star[v][t] = std::max(0.0, -g[t]);
            }
        }
    }
}

ResidualReport kkt_residual(const Problem& problem, const CentralSolution& candidate)
{
    const int V = problem.fleet_size();
    const int T = problem.steps();
    require_size(static_cast<long>(candidate.x_star.size()), V, "candidate schedules");
    require_size(static_cast<long>(candidate.mu_star.size()), V, "candidate energy multipliers");
    require_size(candidate.load_star.size(), T, "candidate load");
    require_size(candidate.lambda_star.size(), T, "candidate price");

    const CentralSolution* sol = &candidate;
    CentralSolution rebuilt;
    if (candidate.mu_plus_star.size() != static_cast<std::size_t>(V) ||
        candidate.mu_minus_star.size() != static_cast<std::size_t>(V)) {
        rebuilt = candidate;
        recover_bound_multipliers(problem, rebuilt);
        sol = &rebuilt;
    }

    ResidualReport r;
    const auto& cost = problem.cost;
    r.stationarity_load =
        (2.0 * cost.c1 * sol->load_star + cost.c2 - sol->lambda_star).cwiseAbs().maxCoeff();

    Vec sum = Vec::Zero(T);
    for (int v = 0; v < V; ++v) {
        const auto& veh = problem.vehicles[v];
        const Vec& x = sol->x_star[v];
        const Vec& mu = sol->mu_star[v];
        const Vec& mp = sol->mu_plus_star[v];
        const Vec& mm = sol->mu_minus_star[v];
        require_size(x.size(), T, "candidate schedule");
        require_size(mu.size(), 2 * T + 2, "candidate energy multiplier");
        sum += x;

        Vec g = sol->lambda_star + mp - mm;
        veh.energy.a.apply_transpose_add(mu, g);
        r.stationarity_schedule = std::max(r.stationarity_schedule, g.cwiseAbs().maxCoeff());

        const Vec slack = veh.energy.a.apply(x) - veh.energy.b;
        r.primal_energy = std::max(r.primal_energy, slack.maxCoeff());
        r.primal_bounds = std::max({r.primal_bounds, (veh.power.lower - x).maxCoeff(),
                                    (x - veh.power.upper).maxCoeff()});
        r.dual_negativity = std::max({r.dual_negativity, (-mu).maxCoeff(), (-mp).maxCoeff(), (-mm).maxCoeff()});
        r.complementarity = std::max({r.complementarity, mu.cwiseProduct(slack).cwiseAbs().maxCoeff(),
                                      mp.cwiseProduct(x - veh.power.upper).cwiseAbs().maxCoeff(),
                                      mm.cwiseProduct(veh.power.lower - x).cwiseAbs().maxCoeff()});
    }
    r.load_balance = (sol->load_star - sum).cwiseAbs().maxCoeff();
    r.primal_energy = std::max(0.0, r.primal_energy);
    r.primal_bounds = std::max(0.0, r.primal_bounds);
    r.dual_negativity = std::max(0.0, r.dual_negativity);
    return r;
}

double lagrangian_value(const Problem& problem, const CentralSolution& sol)
{
    const int V = problem.fleet_size();
    double value = evaluate_objective(problem.cost, sol.load_star);
    Vec sum = Vec::Zero(problem.steps());
    for (int v = 0; v < V; ++v) {
        const auto& veh = problem.vehicles[v];
        const Vec& x = sol.x_star.at(v);
        sum += x;
        value += sol.mu_star.at(v).dot(veh.energy.a.apply(x) - veh.energy.b);
        if (v < static_cast<int>(sol.mu_plus_star.size()))
            value += sol.mu_plus_star[v].dot(x - veh.power.upper);
        if (v < static_cast<int>(sol.mu_minus_star.size()))
            value += sol.mu_minus_star[v].dot(veh.power.lower - x);
    }
    value += sol.lambda_star.dot(sum - sol.load_star);
    return value;
}

double dual_value(const Problem& problem, const CentralSolution& sol)
{
    const auto& cost = problem.cost;
    const Vec shifted = sol.lambda_star - cost.c2;
    double value = -shifted.squaredNorm() / (4.0 * cost.c1);
    for (int v = 0; v < problem.fleet_size(); ++v) {
        const auto& veh = problem.vehicles[v];
        value -= sol.mu_star.at(v).dot(veh.energy.b);
        if (v < static_cast<int>(sol.mu_plus_star.size()))
            value -= sol.mu_plus_star[v].dot(veh.power.upper);
        if (v < static_cast<int>(sol.mu_minus_star.size()))
            value += sol.mu_minus_star[v].dot(veh.power.lower);
    }
    return value;
}

namespace {

void require_feasible(const Problem& problem)
{
    std::vector<PevSpec> specs;
    specs.reserve(problem.vehicles.size());
    for (const auto& v : problem.vehicles)
        specs.push_back(v.spec);
    const auto report = validate_feasibility(specs, problem.grid);
    if (!report.all_feasible())
        throw InfeasibleProblem("scenario has infeasible PEV " + std::to_string(report.infeasible_ids().front()));
}

// Interior-point state of one vehicle over its free coordinates. Inequalities
// G x <= h stack the SOC rows, x <= upper and -x <= 0.
struct IpmBlock {
    detail::ReducedVehicle red;
    int n = 0;
    int ms = 0;
    int m = 0;
    Vec h;
    Vec x, s, z;
    double y = 0.0;

    // factorisation of H = G' W G and the equality-projected inverse M
    Eigen::LLT<Mat> llt;
    Vec qe;
    double sigma_e = 0.0;
    Mat M;

    Vec g_apply(const Vec& v) const
    {
        Vec out(m);
        out.head(ms) = red.soc_rows * v;
        out.segment(ms, n) = v;
        out.tail(n) = -v;
        return out;
    }
    Vec gt_apply(const Vec& w) const
    {
        Vec out = red.soc_rows.transpose() * w.head(ms);
        out += w.segment(ms, n) - w.tail(n);
        return out;
    }
};

struct IpmResiduals {
    Vec r_load;    // 2 c1 L + c2 - lambda
    Vec r_price;   // sum P_v x_v - L
    std::vector<Vec> r_x;  // lambda[free] + G'z + e y
    std::vector<Vec> r_p;  // G x + s - h
    std::vector<double> r_e;
};

struct IpmStep {
    Vec d_load, d_price;
    std::vector<Vec> dx, ds, dz;
    std::vector<double> dy;
};

double max_step(const Vec& v, const Vec& dv)
{
    double a = std::numeric_limits<double>::infinity();
    for (long i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0)
            a = std::min(a, -v[i] / dv[i]);
    return a;
}

}  // namespace

CentralSolution solve_centralized(const Problem& problem, const CentralOptions& options)
{
    require_feasible(problem);
    const int V = problem.fleet_size();
    const int T = problem.steps();
    const double c1 = problem.cost.c1;
    const Vec& c2 = problem.cost.c2;

    std::vector<IpmBlock> blocks(V);
    int total_m = 0;
    for (int v = 0; v < V; ++v) {
        auto& b = blocks[v];
        b.red = detail::reduce_vehicle(problem.vehicles[v], T);
        b.n = b.red.size();
        b.ms = static_cast<int>(b.red.soc_rhs.size());
        b.m = b.ms + 2 * b.n;
        total_m += b.m;
        if (b.n == 0)
            continue;
        b.h.resize(b.m);
        b.h << b.red.soc_rhs, b.red.upper, Vec::Zero(b.n);
        const double even = b.red.terminal_rhs / (b.red.gain * b.n);
        b.x = b.red.upper.cwiseMin(std::max(even, 0.0)).cwiseMax(0.1 * b.red.upper).cwiseMin(0.9 * b.red.upper);
        b.s = (b.h - b.g_apply(b.x)).cwiseMax(1.0);
        b.z = Vec::Ones(b.m);
    }

    Vec load = Vec::Zero(T);
    for (const auto& b : blocks)
        for (int i = 0; i < b.n; ++i)
            load[b.red.free[i]] += b.x[i];
    Vec price = 2.0 * c1 * load + c2;

    const double price_scale = 1.0 + c2.cwiseAbs().maxCoeff();

    auto residuals = [&]() {
        IpmResiduals r;
        r.r_load = 2.0 * c1 * load + c2 - price;
        r.r_price = -load;
        r.r_x.resize(V);
        r.r_p.resize(V);
        r.r_e.assign(V, 0.0);
        for (int v = 0; v < V; ++v) {
            const auto& b = blocks[v];
            if (b.n == 0)
                continue;
            Vec rx = b.gt_apply(b.z);
            for (int i = 0; i < b.n; ++i) {
                rx[i] += price[b.red.free[i]] + b.red.gain * b.y;
                r.r_price[b.red.free[i]] += b.x[i];
            }
            r.r_x[v] = rx;
            r.r_p[v] = b.g_apply(b.x) + b.s - b.h;
            r.r_e[v] = b.red.gain * b.x.sum() - b.red.terminal_rhs;
        }
        return r;
    };

    Eigen::LLT<Mat> schur_llt;
    auto factor = [&]() {
        Mat schur = Mat::Identity(T, T) / (2.0 * c1);
        for (auto& b : blocks) {
            if (b.n == 0)
                continue;
            const Vec w = b.z.cwiseQuotient(b.s);
            Mat H = b.red.soc_rows.transpose() * w.head(b.ms).asDiagonal() * b.red.soc_rows;
            H.diagonal() += w.segment(b.ms, b.n) + w.tail(b.n);
            // static regularisation; refinement against the exact system removes its effect
            H.diagonal().array() += 1e-13 * H.diagonal().maxCoeff();
            b.llt.compute(H);
            if (b.llt.info() != Eigen::Success)
                throw NotConverged("interior point: vehicle block lost positive definiteness");
            const Mat hinv = b.llt.solve(Mat::Identity(b.n, b.n));
            b.qe = hinv * Vec::Constant(b.n, b.red.gain);
            b.sigma_e = b.red.gain * b.qe.sum();
            b.M = hinv - b.qe * b.qe.transpose() / b.sigma_e;
            for (int i = 0; i < b.n; ++i)
                for (int j = 0; j < b.n; ++j)
                    schur(b.red.free[i], b.red.free[j]) += b.M(i, j);
        }
        schur.diagonal().array() += 1e-13 * schur.diagonal().maxCoeff();
        schur_llt.compute(schur);
        if (schur_llt.info() != Eigen::Success)
            throw NotConverged("interior point: coupling system is not positive definite");
    };

    // rc: right-hand side of the complementarity rows, Z ds + S dz = -rc
    auto solve = [&](const IpmResiduals& r, const std::vector<Vec>& rc) {
        IpmStep st;
        st.dx.resize(V);
        st.ds.resize(V);
        st.dz.resize(V);
        st.dy.assign(V, 0.0);
        std::vector<Vec> gv(V), av(V);
        Vec rhs = r.r_price + r.r_load / (2.0 * c1);
        for (int v = 0; v < V; ++v) {
            const auto& b = blocks[v];
            if (b.n == 0)
                continue;
            const Vec corr = (b.z.cwiseProduct(r.r_p[v]) - rc[v]).cwiseQuotient(b.s);
            gv[v] = -r.r_x[v] - b.gt_apply(corr);
            av[v] = b.M * gv[v] - b.qe * (r.r_e[v] / b.sigma_e);
            for (int i = 0; i < b.n; ++i)
                rhs[b.red.free[i]] += av[v][i];
        }
        st.d_price = schur_llt.solve(rhs);
        st.d_load = (st.d_price - r.r_load) / (2.0 * c1);
        for (int v = 0; v < V; ++v) {
            const auto& b = blocks[v];
            if (b.n == 0)
                continue;
            Vec dp(b.n);
            for (int i = 0; i < b.n; ++i)
                dp[i] = st.d_price[b.red.free[i]];
            st.dx[v] = av[v] - b.M * dp;
            const Vec w = gv[v] - dp;
            st.dy[v] = (b.qe.dot(w) + r.r_e[v]) / b.sigma_e;
            st.ds[v] = -r.r_p[v] - b.g_apply(st.dx[v]);
            st.dz[v] = (-rc[v] - b.z.cwiseProduct(st.ds[v])).cwiseQuotient(b.s);
        }
        return st;
    };

    // Residual of the unreduced Newton equations at step st, so that solve()
    // can be re-applied as iterative refinement when the weights span many decades.
    auto refine = [&](const IpmResiduals& r, const std::vector<Vec>& rc, IpmStep& st) {
        IpmResiduals e;
        std::vector<Vec> ec(V);
        e.r_load = 2.0 * c1 * st.d_load - st.d_price + r.r_load;
        e.r_price = -st.d_load + r.r_price;
        e.r_x.resize(V);
        e.r_p.resize(V);
        e.r_e.assign(V, 0.0);
        for (int v = 0; v < V; ++v) {
            const auto& b = blocks[v];
            if (b.n == 0)
                continue;
            Vec rx = b.gt_apply(st.dz[v]) + r.r_x[v];
            for (int i = 0; i < b.n; ++i) {
                rx[i] += st.d_price[b.red.free[i]] + b.red.gain * st.dy[v];
                e.r_price[b.red.free[i]] += st.dx[v][i];
            }
            e.r_x[v] = rx;
            e.r_p[v] = b.g_apply(st.dx[v]) + st.ds[v] + r.r_p[v];
            e.r_e[v] = b.red.gain * st.dx[v].sum() + r.r_e[v];
            ec[v] = b.z.cwiseProduct(st.ds[v]) + b.s.cwiseProduct(st.dz[v]) + rc[v];
        }
        const IpmStep c = solve(e, ec);
        st.d_load += c.d_load;
        st.d_price += c.d_price;
        for (int v = 0; v < V; ++v) {
            if (blocks[v].n == 0)
                continue;
            st.dx[v] += c.dx[v];
            st.ds[v] += c.ds[v];
            st.dz[v] += c.dz[v];
            st.dy[v] += c.dy[v];
        }
    };
    auto solve_refined = [&](const IpmResiduals& r, const std::vector<Vec>& rc) {
        IpmStep st = solve(r, rc);
        for (int pass = 0; pass < 2; ++pass)
            refine(r, rc, st);
        return st;
    };

    auto step_limit = [&](const IpmStep& st) {
        double a = 1.0;
        for (int v = 0; v < V; ++v) {
            const auto& b = blocks[v];
            if (b.n == 0)
                continue;
            a = std::min({a, max_step(b.s, st.ds[v]), max_step(b.z, st.dz[v])});
        }
        return a;
    };

    struct Snapshot {
        Vec load, price;
        std::vector<Vec> x, s, z;
        std::vector<double> y;
        double merit = std::numeric_limits<double>::infinity();
    } best;
    auto remember = [&](double merit) {
        best.merit = merit;
        best.load = load;
        best.price = price;
        best.x.resize(V);
        best.s.resize(V);
        best.z.resize(V);
        best.y.resize(V);
        for (int v = 0; v < V; ++v) {
            best.x[v] = blocks[v].x;
            best.s[v] = blocks[v].s;
            best.z[v] = blocks[v].z;
            best.y[v] = blocks[v].y;
        }
    };
    auto restore = [&]() {
        load = best.load;
        price = best.price;
        for (int v = 0; v < V; ++v) {
            blocks[v].x = best.x[v];
            blocks[v].s = best.s[v];
            blocks[v].z = best.z[v];
            blocks[v].y = best.y[v];
        }
    };
    // Accepted when the target is out of reach because the weights exceed double range.
    const double acceptable = std::max(options.tolerance, 1e-8);

    int iter = 0;
    double pres = 0.0;
    double dres = 0.0;
    double gap = 0.0;
    for (;; ++iter) {
        const auto r = residuals();
        double comp = 0.0;
        pres = r.r_price.cwiseAbs().maxCoeff() / (1.0 + load.cwiseAbs().maxCoeff());
        dres = r.r_load.cwiseAbs().maxCoeff();
        for (int v = 0; v < V; ++v) {
            const auto& b = blocks[v];
            if (b.n == 0)
                continue;
            comp += b.s.dot(b.z);
            pres = std::max(pres, r.r_p[v].cwiseAbs().maxCoeff() / (1.0 + b.h.cwiseAbs().maxCoeff()));
            pres = std::max(pres, std::abs(r.r_e[v]) / (1.0 + b.red.terminal_rhs));
            dres = std::max(dres, r.r_x[v].cwiseAbs().maxCoeff());
        }
        dres /= price_scale;
        const double mu = total_m > 0 ? comp / total_m : 0.0;
        gap = 0.0;
        for (const auto& b : blocks)
            if (b.n > 0)
                gap = std::max(gap, b.s.cwiseProduct(b.z).maxCoeff());
        const double merit = std::max({pres, dres, gap});
        if (std::isfinite(merit) && merit < best.merit)
            remember(merit);
        if (merit <= options.tolerance)
            break;

        const bool capped = iter >= options.max_iterations;
        bool broke_down = !std::isfinite(merit);
        if (!capped && !broke_down) {
            try {
                factor();
                std::vector<Vec> rc(V);
                for (int v = 0; v < V; ++v)
                    if (blocks[v].n > 0)
                        rc[v] = blocks[v].s.cwiseProduct(blocks[v].z);
                const auto aff = solve_refined(r, rc);
                const double a_aff = step_limit(aff);
                double comp_aff = 0.0;
                for (int v = 0; v < V; ++v) {
                    const auto& b = blocks[v];
                    if (b.n == 0)
                        continue;
                    comp_aff += (b.s + a_aff * aff.ds[v]).dot(b.z + a_aff * aff.dz[v]);
                }
                const double mu_aff = total_m > 0 ? comp_aff / total_m : 0.0;
                const double sigma = mu > 0.0 ? std::pow(mu_aff / mu, 3.0) : 0.0;
                for (int v = 0; v < V; ++v)
                    if (blocks[v].n > 0)
                        rc[v] = blocks[v].s.cwiseProduct(blocks[v].z) + aff.ds[v].cwiseProduct(aff.dz[v]) -
                                Vec::Constant(blocks[v].m, sigma * mu);
                const auto st = solve_refined(r, rc);
                const double a = std::min(1.0, 0.99 * step_limit(st));

                load += a * st.d_load;
                price += a * st.d_price;
                for (int v = 0; v < V; ++v) {
                    auto& b = blocks[v];
                    if (b.n == 0)
                        continue;
                    b.x += a * st.dx[v];
                    b.s += a * st.ds[v];
                    b.z += a * st.dz[v];
                    b.y += a * st.dy[v];
                }
                continue;
            } catch (const NotConverged&) {
                broke_down = true;
            }
        }
        if (best.merit <= acceptable) {
            restore();
            break;
        }
        std::ostringstream msg;
        msg << "interior point: " << (broke_down ? "numerical breakdown" : "iteration cap") << " after " << iter
            << " iterations (best scaled residual " << best.merit << ")";
        throw NotConverged(msg.str());
    }

    CentralSolution sol;
    sol.method = "interior-point";
    sol.iterations = iter;
    sol.x_star.assign(V, Vec::Zero(T));
    sol.mu_star.resize(V);
    for (int v = 0; v < V; ++v) {
        const auto& b = blocks[v];
        for (int i = 0; i < b.n; ++i)
            sol.x_star[v][b.red.free[i]] = std::clamp(b.x[i], 0.0, b.red.upper[i]);
        sol.mu_star[v] = b.n > 0 ? detail::expand_energy_multipliers(b.red, T, b.z.head(b.ms), b.y)
                                 : Vec::Zero(2 * T + 2);
    }
    sol.load_star = total_load(sol.x_star);
    sol.lambda_star = price;
    sol.objective_star = evaluate_objective(problem.cost, sol.load_star);
    recover_bound_multipliers(problem, sol);
    return sol;
}

CentralSolution solve_centralized_block_descent(const Problem& problem, const BlockDescentOptions& options)
{
    require_feasible(problem);
    const int V = problem.fleet_size();
    const int T = problem.steps();
    const double c1 = problem.cost.c1;

    struct Block {
        detail::ReducedVehicle red;
        Mat hessian, eq, ineq;
        Vec eq_rhs, ineq_rhs;
        QpResult last;
    };
    std::vector<Block> blocks(V);
    for (int v = 0; v < V; ++v) {
        auto& b = blocks[v];
        b.red = detail::reduce_vehicle(problem.vehicles[v], T);
        const int n = b.red.size();
        const int ms = static_cast<int>(b.red.soc_rhs.size());
        if (n == 0)
            continue;
        b.hessian = 2.0 * c1 * Mat::Identity(n, n);
        b.eq = Mat::Constant(1, n, b.red.gain);
        b.eq_rhs = Vec::Constant(1, b.red.terminal_rhs);
        b.ineq.resize(ms + 2 * n, n);
        b.ineq << b.red.soc_rows, Mat::Identity(n, n), -Mat::Identity(n, n);
        b.ineq_rhs.resize(ms + 2 * n);
        b.ineq_rhs << b.red.soc_rhs, b.red.upper, Vec::Zero(n);
    }

    std::vector<Vec> x(V, Vec::Zero(T));
    Vec load = Vec::Zero(T);
    int sweep = 0;
    for (;; ++sweep) {
        if (sweep >= options.max_sweeps)
            throw NotConverged("block descent: sweep cap reached");
        double change = 0.0;
        double scale = 1.0;
        for (int v = 0; v < V; ++v) {
            auto& b = blocks[v];
            const int n = b.red.size();
            if (n == 0)
                continue;
            const Vec others = load - x[v];
            Vec lin(n);
            for (int i = 0; i < n; ++i) {
                const int t = b.red.free[i];
                lin[i] = 2.0 * c1 * others[t] + problem.cost.c2[t];
            }
            b.last = solve_dense_qp(b.hessian, lin, b.eq, b.eq_rhs, b.ineq, b.ineq_rhs);
            Vec next = Vec::Zero(T);
            for (int i = 0; i < n; ++i)
                next[b.red.free[i]] = b.last.x[i];
            change = std::max(change, (next - x[v]).cwiseAbs().maxCoeff());
            scale = std::max(scale, next.cwiseAbs().maxCoeff());
            x[v] = next;
            load = others + next;
        }
        if (change <= options.tolerance * scale)
            break;
    }

    CentralSolution sol;
    sol.method = "block-descent";
    sol.iterations = sweep + 1;
    sol.mu_star.resize(V);
    for (int v = 0; v < V; ++v) {
        const auto& b = blocks[v];
        const int n = b.red.size();
        if (n == 0) {
            sol.mu_star[v] = Vec::Zero(2 * T + 2);
            continue;
        }
        // clamp the last sub-ulp drift of active box rows
        for (int i = 0; i < n; ++i)
            x[v][b.red.free[i]] = std::clamp(x[v][b.red.free[i]], 0.0, b.red.upper[i]);
        const int ms = static_cast<int>(b.red.soc_rhs.size());
        sol.mu_star[v] = detail::expand_energy_multipliers(b.red, T, b.last.ineq_multipliers.head(ms),
                                                           b.last.eq_multipliers[0]);
    }
    sol.x_star = x;
    sol.load_star = total_load(x);
    sol.lambda_star = objective_gradient(problem.cost, sol.load_star);
    sol.objective_star = evaluate_objective(problem.cost, sol.load_star);
    recover_bound_multipliers(problem, sol);
    return sol;
}

}  // namespace pevcc
