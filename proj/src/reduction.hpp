#pragma once

#include "pevcc/problem.hpp"

#include <vector>

namespace pevcc::detail {

// One vehicle's constraints restricted to its chargeable steps. Steps with
// upper == lower == 0 are dropped, SOC rows with identical support are merged
// to the tightest one, rows without support become feasibility checks, and the
// terminal pair becomes an equality. Needed by both central solvers, whose
// factorisations fail on duplicate or opposed-identical rows.
struct ReducedVehicle {
    std::vector<int> free;      // indices into the horizon
    Mat soc_rows;               // rows over free coordinates
    Vec soc_rhs;
    std::vector<int> soc_source;  // original row of A for each kept row
    Vec upper;                  // bounds of the free coordinates (lower is 0)
    double gain = 0.0;          // efficiency * delta_t
    double terminal_rhs = 0.0;  // gain * sum(x_free) == terminal_rhs

    int size() const { return static_cast<int>(free.size()); }
};

ReducedVehicle reduce_vehicle(const Vehicle& vehicle, int steps);

// Map reduced multipliers back onto the (2T+2) rows of A.
Vec expand_energy_multipliers(const ReducedVehicle& red, int steps, const Vec& soc_mult, double terminal_mult);

}  // namespace pevcc::detail
