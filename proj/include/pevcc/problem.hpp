#pragma once

#include "pevcc/cost.hpp"
#include "pevcc/fleet.hpp"

#include <vector>

namespace pevcc {

struct Vehicle {
    PevSpec spec;
    EnergyConstraintSet energy;
    PowerBounds power;
};

// Fully resolved PEV-CC instance: fixed cost coefficients and per-vehicle constraint data.
struct Problem {
    TimeGrid grid;
    std::vector<Vehicle> vehicles;
    CostModel cost;

    int fleet_size() const { return static_cast<int>(vehicles.size()); }
    int steps() const { return grid.steps; }
};

// Validates dimensions and throws InfeasibleProblem naming the first infeasible vehicle.
Problem make_problem(const TimeGrid& grid, const std::vector<PevSpec>& fleet, const CostModel& cost);

Vec total_load(const std::vector<Vec>& schedules);

}  // namespace pevcc
