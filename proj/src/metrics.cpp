#include "pevcc/metrics.hpp"

#include "pevcc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pevcc {

double rel_obj(double f, double f_star)
{
    if (f_star == 0.0)
        throw InvalidInput("rel_obj: optimal objective is zero");
    return std::abs(f - f_star) / f_star;
}

double rel_load(double total_energy, const Vec& load_star)
{
    const double ref = load_star.sum();
    if (!(ref > 0.0))
        throw InvalidInput("rel_load: optimal total load is not positive");
    return std::abs(total_energy - ref) / ref;
}

double rel_load(const std::vector<Vec>& schedules, const Vec& load_star)
{
    double total = 0.0;
    for (const auto& x : schedules) {
        require_size(x.size(), load_star.size(), "schedule");
        total += x.sum();
    }
    return rel_load(total, load_star);
}

double consensus_disagreement(const Topology& topology, const std::vector<Vec>& prices)
{
    require_size(static_cast<long>(prices.size()), topology.num_agents(), "prices");
    double worst = 0.0;
    for (int v = 0; v < topology.num_agents(); ++v) {
        Vec acc = Vec::Zero(prices[v].size());
        for (int w : topology.neighbors(v))
            acc += prices[v] - prices[w];
        if (acc.size() > 0)
            worst = std::max(worst, acc.cwiseAbs().maxCoeff());
    }
    return worst;
}

ValleyStats valley_filling_stats(const Vec& pev_load, const Vec& inelastic)
{
    require_size(pev_load.size(), inelastic.size(), "pev load");
    const long n = inelastic.size();
    if (n == 0)
        throw DimensionError("valley stats: empty profiles");
    auto variance = [](const Vec& v) { return (v.array() - v.mean()).square().mean(); };
    const Vec combined = pev_load + inelastic;

    ValleyStats s;
    s.inelastic_variance = variance(inelastic);
    s.combined_variance = variance(combined);
    s.inelastic_peak = inelastic.maxCoeff();
    s.combined_peak = combined.maxCoeff();

    std::vector<long> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](long a, long b) { return inelastic[a] < inelastic[b]; });
    const long third = std::max<long>(1, n / 3);
    double valley = 0.0;
    for (long i = 0; i < third; ++i)
        valley += pev_load[order[i]];
    const double total = pev_load.sum();
    s.valley_energy_fraction = total > 0.0 ? valley / total : 0.0;
    return s;
}

}  // namespace pevcc
