#include "pevcc/problem.hpp"

#include "pevcc/errors.hpp"

#include <string>

namespace pevcc {

Problem make_problem(const TimeGrid& grid, const std::vector<PevSpec>& fleet, const CostModel& cost)
{
    grid.validate();
    if (fleet.empty())
        throw InvalidInput("fleet is empty");
    require_size(cost.c2.size(), grid.steps, "cost c2");
    require_size(cost.inelastic_load_kw.size(), grid.steps, "inelastic load");
    if (!(cost.c1 > 0.0))
        throw InvalidInput("c1 must be > 0");

    const auto report = validate_feasibility(fleet, grid);
    for (const auto& v : report.vehicles)
        if (!v.feasible)
            throw InfeasibleProblem("PEV " + std::to_string(v.id) + " is infeasible: " +
                                    std::to_string(v.deficit_kwh) + " kWh short at step " +
                                    std::to_string(v.first_violation_step));

    Problem p{grid, {}, cost};
    p.vehicles.reserve(fleet.size());
    for (const auto& spec : fleet)
        p.vehicles.push_back({spec, build_energy_constraints(spec, grid), build_power_bounds(spec, grid)});
    return p;
}

Vec total_load(const std::vector<Vec>& schedules)
{
    if (schedules.empty())
        return Vec();
    Vec sum = Vec::Zero(schedules.front().size());
    for (const auto& x : schedules) {
        require_size(x.size(), sum.size(), "schedule");
        sum += x;
    }
    return sum;
}

}  // namespace pevcc
