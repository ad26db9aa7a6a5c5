#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace pevcc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct TimeGrid {
    int steps = 96;
    double delta_t = 0.25;  // hours

    void validate() const;
    double hours() const { return steps * delta_t; }
};

struct PevSpec {
    int id = 0;
    double capacity_kwh = 24.0;
    double soc_min = 0.2;
    double efficiency = 0.9;
    double max_power_kw = 11.0;
    double initial_energy_kwh = 12.0;
    std::vector<int> connection;        // 0/1 per step
    std::vector<double> consumption_kwh;  // per step, only while disconnected

    void validate(const TimeGrid& grid) const;
};

// Cumulative-sum operator of one vehicle: rows are upper SOC (T), lower SOC (T),
// terminal <= and terminal >=. Depends only on (T, efficiency * delta_t), so the
// operator is shared by value instead of storing a dense (2T+2) x T matrix.
class EnergyOperator {
public:
    EnergyOperator() = default;
    EnergyOperator(int steps, double gain);

    int steps() const { return steps_; }
    int rows() const { return 2 * steps_ + 2; }
    double gain() const { return gain_; }

    Vec apply(const Vec& x) const;
    Vec apply_transpose(const Vec& mu) const;
    void apply_transpose_add(const Vec& mu, Vec& out) const;
    Mat dense() const;

    bool operator==(const EnergyOperator&) const = default;

private:
    int steps_ = 0;
    double gain_ = 0.0;
};

struct EnergyConstraintSet {
    EnergyOperator a;
    Vec b;

    Mat a_matrix() const { return a.dense(); }
    // max(0, A x - b) in max norm
    double violation(const Vec& x) const;
};

struct PowerBounds {
    Vec lower;
    Vec upper;
};

EnergyConstraintSet build_energy_constraints(const PevSpec& spec, const TimeGrid& grid);
PowerBounds build_power_bounds(const PevSpec& spec, const TimeGrid& grid);

// Battery content after each step under schedule x (kW), by direct recursion.
Vec energy_trajectory(const PevSpec& spec, const TimeGrid& grid, const Vec& x);

struct VehicleFeasibility {
    int id = 0;
    bool feasible = true;
    int first_violation_step = -1;  // -1 when feasible; T means the terminal condition
    double deficit_kwh = 0.0;       // energy missing at the failing step
    double headroom_kwh = 0.0;      // spare charging energy above the terminal requirement
};

struct FeasibilityReport {
    std::vector<VehicleFeasibility> vehicles;

    bool all_feasible() const;
    std::vector<int> infeasible_ids() const;
};

FeasibilityReport validate_feasibility(const std::vector<PevSpec>& specs, const TimeGrid& grid);

struct FleetGenParams {
    int size = 100;
    TimeGrid grid{};
    std::vector<double> capacities_kwh{16.0, 24.0};
    double soc_min = 0.2;
    double efficiency = 0.9;
    double max_power_kw = 11.0;
    double initial_soc_lo = 0.5;
    double initial_soc_hi = 0.9;
    double departure_mean_h = 7.5;
    double departure_sd_h = 1.0;
    double departure_min_h = 5.0;
    double departure_max_h = 10.0;
    double return_mean_h = 17.5;
    double return_sd_h = 1.0;
    double return_min_h = 15.0;
    double return_max_h = 21.0;
    double trip_duration_h = 0.5;
    double trip_energy_min_kwh = 1.5;
    double trip_energy_max_kwh = 4.0;
    int trips_per_day = 2;  // 0 keeps every vehicle at home and connected
    // vehicles that stay home and make one short round trip around noon instead of commuting
    double midday_trip_probability = 0.0;
    double midday_mean_h = 12.5;
    double midday_sd_h = 1.0;

    void validate() const;
};

std::vector<PevSpec> generate_synthetic_fleet(const FleetGenParams& params, std::uint64_t seed);

}  // namespace pevcc
