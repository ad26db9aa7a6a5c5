#pragma once

#include "pevcc/scenario.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace testing {

inline std::filesystem::path data_path(const std::string& rel) { return std::filesystem::path(PEVCC_DATA_DIR) / rel; }

// Frozen CLARABEL optima (tests/oracles/cvxpy_reference.py).
inline constexpr double kFixtureObjective = 6.0726036300909945;
inline constexpr double kFixtureTotalLoad = 7.037037037037036;
inline constexpr double kFleet100Objective = 964.7130020267041;
inline constexpr double kFleet100TotalLoad = 2402.40520584373;

inline pevcc::PevSpec make_spec(int id, std::vector<int> conn, std::vector<double> cons, double capacity = 10.0,
                                double soc_min = 0.2, double efficiency = 1.0, double power = 11.0,
                                double initial = 5.0)
{
    pevcc::PevSpec s;
    s.id = id;
    s.capacity_kwh = capacity;
    s.soc_min = soc_min;
    s.efficiency = efficiency;
    s.max_power_kw = power;
    s.initial_energy_kwh = initial;
    s.connection = std::move(conn);
    s.consumption_kwh = std::move(cons);
    return s;
}

inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("pevcc_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing
