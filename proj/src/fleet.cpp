#include "pevcc/fleet.hpp"

#include "pevcc/errors.hpp"
#include "random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pevcc {

namespace {

std::string pev_label(int id) { return "PEV " + std::to_string(id); }

}  // namespace

void TimeGrid::validate() const
{
    if (steps < 1)
        throw InvalidInput("grid.T must be >= 1");
    if (!(delta_t > 0.0))
        throw InvalidInput("grid.delta_t must be > 0");
}

void PevSpec::validate(const TimeGrid& grid) const
{
    const auto label = pev_label(id);
    require_size(static_cast<long>(connection.size()), grid.steps, label + " connection");
    require_size(static_cast<long>(consumption_kwh.size()), grid.steps, label + " consumption_kwh");
    if (!(capacity_kwh > 0.0))
        throw InvalidInput(label + ": capacity_kwh must be > 0");
    if (!(soc_min >= 0.0 && soc_min < 1.0))
        throw InvalidInput(label + ": soc_min must lie in [0, 1)");
    if (!(efficiency > 0.0 && efficiency <= 1.0))
        throw InvalidInput(label + ": efficiency must lie in (0, 1]");
    if (!(max_power_kw >= 0.0))
        throw InvalidInput(label + ": max_power_kw must be >= 0");
    if (initial_energy_kwh < soc_min * capacity_kwh || initial_energy_kwh > capacity_kwh)
        throw InvalidInput(label + ": initial_energy_kwh outside [soc_min*C, C]");
    for (int t = 0; t < grid.steps; ++t) {
        if (connection[t] != 0 && connection[t] != 1)
            throw InvalidInput(label + ": connection must be 0/1 at t=" + std::to_string(t));
        if (!(consumption_kwh[t] >= 0.0))
            throw InvalidInput(label + ": negative consumption at t=" + std::to_string(t));
        if (connection[t] == 1 && consumption_kwh[t] > 0.0)
            throw InvalidInput(label + ": consumption while connected at t=" + std::to_string(t));
    }
}

EnergyOperator::EnergyOperator(int steps, double gain) : steps_(steps), gain_(gain)
{
    if (steps < 1)
        throw InvalidInput("energy operator needs T >= 1");
}

Vec EnergyOperator::apply(const Vec& x) const
{
    require_size(x.size(), steps_, "A*x");
    Vec out(rows());
    double run = 0.0;
    for (int t = 0; t < steps_; ++t) {
        run += gain_ * x[t];
        out[t] = run;
        out[steps_ + t] = -run;
    }
    out[2 * steps_] = run;
    out[2 * steps_ + 1] = -run;
    return out;
}

void EnergyOperator::apply_transpose_add(const Vec& mu, Vec& out) const
{
    require_size(mu.size(), rows(), "A^T*mu");
    require_size(out.size(), steps_, "A^T*mu output");
    double tail = mu[2 * steps_] - mu[2 * steps_ + 1];
    for (int t = steps_ - 1; t >= 0; --t) {
        tail += mu[t] - mu[steps_ + t];
        out[t] += gain_ * tail;
    }
}

Vec EnergyOperator::apply_transpose(const Vec& mu) const
{
    Vec out = Vec::Zero(steps_);
    apply_transpose_add(mu, out);
    return out;
}

Mat EnergyOperator::dense() const
{
    Mat a = Mat::Zero(rows(), steps_);
    for (int r = 0; r < steps_; ++r)
        for (int t = 0; t <= r; ++t) {
            a(r, t) = gain_;
            a(steps_ + r, t) = -gain_;
        }
    a.row(2 * steps_).setConstant(gain_);
    a.row(2 * steps_ + 1).setConstant(-gain_);
    return a;
}

double EnergyConstraintSet::violation(const Vec& x) const
{
    return std::max(0.0, (a.apply(x) - b).maxCoeff());
}

EnergyConstraintSet build_energy_constraints(const PevSpec& spec, const TimeGrid& grid)
{
    grid.validate();
    spec.validate(grid);
    const int T = grid.steps;
    EnergyConstraintSet set{EnergyOperator(T, spec.efficiency * grid.delta_t), Vec(2 * T + 2)};
    const double c = spec.capacity_kwh;
    const double e0 = spec.initial_energy_kwh;
    double cum = 0.0;
    for (int t = 0; t < T; ++t) {
        cum += spec.consumption_kwh[t];
        set.b[t] = c - e0 + cum;
        set.b[T + t] = e0 - spec.soc_min * c - cum;
    }
    set.b[2 * T] = cum;
    set.b[2 * T + 1] = -cum;
    return set;
}

PowerBounds build_power_bounds(const PevSpec& spec, const TimeGrid& grid)
{
    require_size(static_cast<long>(spec.connection.size()), grid.steps, pev_label(spec.id) + " connection");
    PowerBounds pb{Vec::Zero(grid.steps), Vec::Zero(grid.steps)};
    for (int t = 0; t < grid.steps; ++t)
        pb.upper[t] = spec.connection[t] == 1 ? spec.max_power_kw : 0.0;
    return pb;
}

Vec energy_trajectory(const PevSpec& spec, const TimeGrid& grid, const Vec& x)
{
    require_size(x.size(), grid.steps, "schedule");
    require_size(static_cast<long>(spec.consumption_kwh.size()), grid.steps, "consumption_kwh");
    Vec e(grid.steps);
    double level = spec.initial_energy_kwh;
    for (int t = 0; t < grid.steps; ++t) {
        level += spec.efficiency * grid.delta_t * x[t] - spec.consumption_kwh[t];
        e[t] = level;
    }
    return e;
}

bool FeasibilityReport::all_feasible() const
{
    return std::all_of(vehicles.begin(), vehicles.end(), [](const auto& v) { return v.feasible; });
}

std::vector<int> FeasibilityReport::infeasible_ids() const
{
    std::vector<int> ids;
    for (const auto& v : vehicles)
        if (!v.feasible)
            ids.push_back(v.id);
    return ids;
}

FeasibilityReport validate_feasibility(const std::vector<PevSpec>& specs, const TimeGrid& grid)
{
    // Forward reachability: the set of battery levels reachable after step t is an
    // interval, so two numbers per step decide feasibility exactly. The upper end
    // is the charge-at-full-power trajectory.
    FeasibilityReport report;
    for (const auto& spec : specs) {
        spec.validate(grid);
        VehicleFeasibility out;
        out.id = spec.id;
        const double gain = spec.efficiency * grid.delta_t;
        const double floor_kwh = spec.soc_min * spec.capacity_kwh;
        double lo = spec.initial_energy_kwh;
        double hi = lo;
        for (int t = 0; t < grid.steps && out.feasible; ++t) {
            const double up = spec.connection[t] == 1 ? spec.max_power_kw : 0.0;
            const double next_lo = lo - spec.consumption_kwh[t];
            const double next_hi = hi + gain * up - spec.consumption_kwh[t];
            lo = std::max(floor_kwh, next_lo);
            hi = std::min(spec.capacity_kwh, next_hi);
            if (lo > hi) {
                out.feasible = false;
                out.first_violation_step = t;
                out.deficit_kwh = next_hi < floor_kwh ? floor_kwh - next_hi : next_lo - spec.capacity_kwh;
            }
        }
        if (out.feasible) {
            const double target = spec.initial_energy_kwh;
            if (target > hi) {
                out.feasible = false;
                out.first_violation_step = grid.steps;
                out.deficit_kwh = target - hi;
            } else if (target < lo) {
                out.feasible = false;
                out.first_violation_step = grid.steps;
                out.deficit_kwh = lo - target;
            } else {
                out.headroom_kwh = hi - target;
            }
        }
        report.vehicles.push_back(out);
    }
    return report;
}

void FleetGenParams::validate() const
{
    grid.validate();
    if (size < 1)
        throw InvalidInput("fleet size must be >= 1");
    if (capacities_kwh.empty())
        throw InvalidInput("capacities_kwh must be nonempty");
    for (double c : capacities_kwh)
        if (!(c > 0.0))
            throw InvalidInput("capacities_kwh entries must be > 0");
    if (!(initial_soc_lo >= soc_min && initial_soc_lo <= initial_soc_hi && initial_soc_hi <= 1.0))
        throw InvalidInput("need soc_min <= initial_soc_lo <= initial_soc_hi <= 1");
    if (!(trip_energy_min_kwh >= 0.0 && trip_energy_min_kwh <= trip_energy_max_kwh))
        throw InvalidInput("need 0 <= trip_energy_min_kwh <= trip_energy_max_kwh");
    if (trips_per_day != 0 && trips_per_day != 2)
        throw InvalidInput("trips_per_day must be 0 or 2");
    if (!(midday_trip_probability >= 0.0 && midday_trip_probability <= 1.0))
        throw InvalidInput("midday_trip_probability must lie in [0, 1]");
    if (!(departure_min_h <= departure_max_h && return_min_h <= return_max_h &&
          departure_max_h + 2 * trip_duration_h <= return_min_h))
        throw InvalidInput("trip time windows overlap");
    if (trips_per_day > 0 && return_max_h > grid.hours())
        throw InvalidInput("return window extends past the horizon");
    // Both commute legs happen without a recharge in between, after at most a
    // full charge in the morning.
    const double c_min = *std::min_element(capacities_kwh.begin(), capacities_kwh.end());
    if (trips_per_day > 0 && 2.0 * trip_energy_max_kwh > (1.0 - soc_min) * c_min)
        throw InvalidInput("trip energy exceeds the usable battery window of the smallest battery");
}

std::vector<PevSpec> generate_synthetic_fleet(const FleetGenParams& params, std::uint64_t seed)
{
    params.validate();
    detail::Rng rng(seed);
    const int T = params.grid.steps;
    const double dt = params.grid.delta_t;
    const int trip_steps = std::max(1, static_cast<int>(std::lround(params.trip_duration_h / dt)));
    auto step_of = [&](double hours) { return std::clamp(static_cast<int>(std::floor(hours / dt)), 0, T); };

    std::vector<PevSpec> fleet;
    fleet.reserve(params.size);
    for (int v = 0; v < params.size; ++v) {
        PevSpec spec;
        spec.id = v;
        spec.capacity_kwh = params.capacities_kwh[rng.index(params.capacities_kwh.size())];
        spec.soc_min = params.soc_min;
        spec.efficiency = params.efficiency;
        spec.max_power_kw = params.max_power_kw;
        spec.connection.assign(T, 1);
        spec.consumption_kwh.assign(T, 0.0);

        auto drive = [&](int start, double energy) {
            for (int s = 0; s < trip_steps && start + s < T; ++s) {
                spec.connection[start + s] = 0;
                spec.consumption_kwh[start + s] = energy / trip_steps;
            }
        };

        if (params.trips_per_day > 0) {
            const bool stays_home = rng.uniform() < params.midday_trip_probability;
            if (stays_home) {
                const double h = std::clamp(rng.normal(params.midday_mean_h, params.midday_sd_h), 9.0, 16.0);
                const int out = step_of(h);
                const int back = std::min(T - trip_steps, out + trip_steps + step_of(1.0));
                for (int t = out; t < back; ++t)
                    spec.connection[t] = 0;
                drive(out, 0.5 * rng.uniform(params.trip_energy_min_kwh, params.trip_energy_max_kwh));
                drive(back - trip_steps, 0.5 * rng.uniform(params.trip_energy_min_kwh, params.trip_energy_max_kwh));
            } else {
                const double dep_h = std::clamp(rng.normal(params.departure_mean_h, params.departure_sd_h),
                                                params.departure_min_h, params.departure_max_h);
                const double ret_h = std::clamp(rng.normal(params.return_mean_h, params.return_sd_h),
                                                params.return_min_h, params.return_max_h);
                const int dep = step_of(dep_h);
                const int ret = std::max(dep + 2 * trip_steps, step_of(ret_h));
                for (int t = dep; t < ret && t < T; ++t)
                    spec.connection[t] = 0;
                drive(dep, rng.uniform(params.trip_energy_min_kwh, params.trip_energy_max_kwh));
                drive(ret - trip_steps, rng.uniform(params.trip_energy_min_kwh, params.trip_energy_max_kwh));
            }
        }
        spec.initial_energy_kwh = rng.uniform(params.initial_soc_lo, params.initial_soc_hi) * spec.capacity_kwh;
        fleet.push_back(std::move(spec));
    }

    const auto report = validate_feasibility(fleet, params.grid);
    if (!report.all_feasible())
        throw InvalidInput("generated fleet has infeasible vehicles (first id " +
                           std::to_string(report.infeasible_ids().front()) +
                           "); widen the horizon or reduce trip energy");
    return fleet;
}

}  // namespace pevcc
