#include "reduction.hpp"

#include "pevcc/errors.hpp"

#include <cmath>
#include <map>
#include <string>

namespace pevcc::detail {

namespace {

void require_row(bool ok, const Vehicle& v, int row)
{
    if (!ok)
        throw InfeasibleProblem("PEV " + std::to_string(v.spec.id) + ": energy row " + std::to_string(row) +
                                " cannot be satisfied");
}

}  // namespace

ReducedVehicle reduce_vehicle(const Vehicle& vehicle, int steps)
{
    const int T = steps;
    const auto& b = vehicle.energy.b;
    ReducedVehicle red;
    red.gain = vehicle.energy.a.gain();
    red.terminal_rhs = b[2 * T];
    for (int t = 0; t < T; ++t) {
        if (vehicle.power.lower[t] != 0.0)
            throw InvalidInput("central solvers assume a zero lower power bound");
        if (vehicle.power.upper[t] > 0.0)
            red.free.push_back(t);
    }
    const auto slack_tol = [](double rhs) { return 1e-9 * (1.0 + std::abs(rhs)); };

    // terminal energy of zero with x >= 0 pins the whole schedule at zero
    if (red.free.empty() || red.terminal_rhs <= 0.0) {
        red.free.clear();
        for (int r = 0; r < 2 * T + 2; ++r)
            require_row(b[r] >= -slack_tol(b[r]), vehicle, r);
        red.soc_rows = Mat(0, 0);
        red.soc_rhs = Vec(0);
        red.upper = Vec(0);
        return red;
    }

    const int n = red.size();
    red.upper.resize(n);
    for (int i = 0; i < n; ++i)
        red.upper[i] = vehicle.power.upper[red.free[i]];

    // support size k = number of free steps at or before row r
    std::map<int, int> upper_pick;  // k -> row with smallest rhs
    std::map<int, int> lower_pick;
    int k = 0;
    for (int r = 0; r < T; ++r) {
        while (k < n && red.free[k] <= r)
            ++k;
        const double d = red.terminal_rhs;
        if (k == 0) {
            require_row(b[r] >= -slack_tol(b[r]), vehicle, r);
            require_row(b[T + r] >= -slack_tol(b[T + r]), vehicle, T + r);
            continue;
        }
        if (k == n) {
            require_row(d <= b[r] + slack_tol(b[r]), vehicle, r);
            require_row(-d <= b[T + r] + slack_tol(b[T + r]), vehicle, T + r);
            continue;
        }
        auto keep_tightest = [&](std::map<int, int>& pick, int row) {
            auto it = pick.find(k);
            if (it == pick.end() || b[row] < b[it->second])
                pick[k] = row;
        };
        keep_tightest(upper_pick, r);
        keep_tightest(lower_pick, T + r);
    }

    const int rows = static_cast<int>(upper_pick.size() + lower_pick.size());
    red.soc_rows = Mat::Zero(rows, n);
    red.soc_rhs.resize(rows);
    int row = 0;
    for (auto [support, src] : upper_pick) {
        red.soc_rows.row(row).head(support).setConstant(red.gain);
        red.soc_rhs[row] = b[src];
        red.soc_source.push_back(src);
        ++row;
    }
    for (auto [support, src] : lower_pick) {
        red.soc_rows.row(row).head(support).setConstant(-red.gain);
        red.soc_rhs[row] = b[src];
        red.soc_source.push_back(src);
        ++row;
    }
    return red;
}

Vec expand_energy_multipliers(const ReducedVehicle& red, int steps, const Vec& soc_mult, double terminal_mult)
{
    Vec mu = Vec::Zero(2 * steps + 2);
    for (std::size_t i = 0; i < red.soc_source.size(); ++i)
        mu[red.soc_source[i]] = std::max(0.0, soc_mult[static_cast<long>(i)]);
    mu[2 * steps] = std::max(0.0, terminal_mult);
    mu[2 * steps + 1] = std::max(0.0, -terminal_mult);
    return mu;
}

}  // namespace pevcc::detail
