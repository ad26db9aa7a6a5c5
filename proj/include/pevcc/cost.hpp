#pragma once

#include "pevcc/fleet.hpp"

namespace pevcc {

// Quadratic serving cost of the aggregate PEV load:
//   f(L) = c1 * |L|^2 + c2' L,   c1 = b_tilde,  c2 = a_tilde + 2 b_tilde * inelastic
struct CostModel {
    double c1 = 1.0;
    Vec c2;
    Vec inelastic_load_kw;
    double a_tilde = 0.0;
    double b_tilde = 1.0;

    int steps() const { return static_cast<int>(c2.size()); }
};

CostModel derive_cost_coefficients(double a_tilde, double b_tilde, const Vec& inelastic_load_kw);

double evaluate_objective(const CostModel& model, const Vec& load);
Vec objective_gradient(const CostModel& model, const Vec& load);

// Serving cost including the inelastic part; differs from evaluate_objective by a constant.
double serving_cost(const CostModel& model, const Vec& load);

// Winter weekday household shape (night valley, late-morning shoulder, evening
// peak), unit mean, sampled at step starts.
Vec synthetic_inelastic_profile(const TimeGrid& grid);

// Grid-side energy the fleet must recharge over the horizon: sum of consumption / efficiency.
double fleet_charging_energy_kwh(const std::vector<PevSpec>& fleet);

// Factor k such that k * base carries (1 - share) / share times the fleet's charging energy.
double pev_share_scale(const Vec& base_profile_kw, const TimeGrid& grid, const std::vector<PevSpec>& fleet,
                       double share);

}  // namespace pevcc
