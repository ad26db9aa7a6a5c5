#pragma once

#include "pevcc/fleet.hpp"
#include "pevcc/network.hpp"

#include <vector>

namespace pevcc {

struct ConvergenceSample {
    long iteration = 0;
    double rel_obj = 0.0;
    double rel_load = 0.0;
    double consensus_disagreement = 0.0;
    double max_kkt_residual = 0.0;
};

// |f - f*| / f*; throws InvalidInput when f* == 0.
double rel_obj(double f, double f_star);

// |sum_t sum_v x_v(t) - sum_t L*(t)| / sum_t L*(t); throws when the denominator is not positive.
double rel_load(const std::vector<Vec>& schedules, const Vec& load_star);
double rel_load(double total_energy, const Vec& load_star);

// max over agents of || sum_{w in N(v)} (lambda_v - lambda_w) ||_inf on the full graph.
double consensus_disagreement(const Topology& topology, const std::vector<Vec>& prices);

struct ValleyStats {
    double inelastic_variance = 0.0;
    double combined_variance = 0.0;
    double inelastic_peak = 0.0;
    double combined_peak = 0.0;
    double valley_energy_fraction = 0.0;  // PEV energy in the lowest-inelastic third of steps
};

ValleyStats valley_filling_stats(const Vec& pev_load, const Vec& inelastic);

}  // namespace pevcc
