#include "pevcc/cost.hpp"

#include "pevcc/errors.hpp"

#include <cmath>
#include <numeric>

namespace pevcc {

CostModel derive_cost_coefficients(double a_tilde, double b_tilde, const Vec& inelastic_load_kw)
{
    if (!(b_tilde > 0.0))
        throw InvalidInput("b_tilde must be > 0");
    if (inelastic_load_kw.size() == 0)
        throw DimensionError("inelastic load profile is empty");
    if ((inelastic_load_kw.array() < 0.0).any() || !inelastic_load_kw.allFinite())
        throw InvalidInput("inelastic load must be finite and >= 0");
    CostModel m;
    m.a_tilde = a_tilde;
    m.b_tilde = b_tilde;
    m.c1 = b_tilde;
    m.inelastic_load_kw = inelastic_load_kw;
    m.c2 = (a_tilde + 2.0 * b_tilde * inelastic_load_kw.array()).matrix();
    return m;
}

double evaluate_objective(const CostModel& model, const Vec& load)
{
    require_size(load.size(), model.c2.size(), "load");
    return model.c1 * load.squaredNorm() + model.c2.dot(load);
}

Vec objective_gradient(const CostModel& model, const Vec& load)
{
    require_size(load.size(), model.c2.size(), "load");
    return 2.0 * model.c1 * load + model.c2;
}

double serving_cost(const CostModel& model, const Vec& load)
{
    require_size(load.size(), model.c2.size(), "load");
    const Vec total = load + model.inelastic_load_kw;
    return model.a_tilde * total.sum() + model.b_tilde * total.squaredNorm();
}

Vec synthetic_inelastic_profile(const TimeGrid& grid)
{
    grid.validate();
    Vec p(grid.steps);
    for (int t = 0; t < grid.steps; ++t) {
        const double h = std::fmod(t * grid.delta_t, 24.0);
        auto bump = [h](double centre, double width) {
            const double z = (h - centre) / width;
            return std::exp(-z * z);
        };
        p[t] = 0.6 + 0.25 * bump(11.0, 2.5) + 0.35 * bump(18.5, 2.0) - 0.2 * bump(3.5, 2.5);
    }
    return p / p.mean();
}

double fleet_charging_energy_kwh(const std::vector<PevSpec>& fleet)
{
    double total = 0.0;
    for (const auto& s : fleet)
        total += std::accumulate(s.consumption_kwh.begin(), s.consumption_kwh.end(), 0.0) / s.efficiency;
    return total;
}

double pev_share_scale(const Vec& base_profile_kw, const TimeGrid& grid, const std::vector<PevSpec>& fleet,
                       double share)
{
    if (!(share > 0.0 && share < 1.0))
        throw InvalidInput("pev share must lie in (0, 1)");
    require_size(base_profile_kw.size(), grid.steps, "inelastic profile");
    const double base_energy = base_profile_kw.sum() * grid.delta_t;
    if (!(base_energy > 0.0))
        throw InvalidInput("inelastic profile carries no energy; cannot scale to a PEV share");
    // Total PEV energy is fixed by the terminal conditions, so the share is linear
    // in the scale factor and solves in closed form.
    return (1.0 - share) / share * fleet_charging_energy_kwh(fleet) / base_energy;
}

}  // namespace pevcc
