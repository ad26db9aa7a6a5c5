#include "pevcc/network.hpp"

#include "pevcc/errors.hpp"
#include "random.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

namespace pevcc {

Topology::Topology(int num_agents, const std::vector<Edge>& edges)
{
    if (num_agents < 1)
        throw TopologyError("topology needs at least one agent");
    neighbors_.assign(num_agents, {});
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || u >= num_agents || v >= num_agents)
            throw TopologyError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                ") out of range for " + std::to_string(num_agents) + " agents");
        if (u == v)
            throw TopologyError("self-loop at agent " + std::to_string(u));
        neighbors_[u].push_back(v);
        neighbors_[v].push_back(u);
    }
    for (auto& n : neighbors_) {
        std::sort(n.begin(), n.end());
        n.erase(std::unique(n.begin(), n.end()), n.end());
    }

    std::vector<char> seen(num_agents, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : neighbors_[v])
            if (!seen[w]) {
                seen[w] = 1;
                ++reached;
                stack.push_back(w);
            }
    }
    if (reached != num_agents)
        throw TopologyError("communication graph is disconnected (" + std::to_string(reached) + " of " +
                            std::to_string(num_agents) + " agents reachable from agent 0)");
}

Topology Topology::path(int num_agents)
{
    std::vector<Edge> e;
    for (int v = 0; v + 1 < num_agents; ++v)
        e.emplace_back(v, v + 1);
    return Topology(num_agents, e);
}

Topology Topology::ring(int num_agents)
{
    std::vector<Edge> e;
    for (int v = 0; v + 1 < num_agents; ++v)
        e.emplace_back(v, v + 1);
    if (num_agents > 2)
        e.emplace_back(num_agents - 1, 0);
    return Topology(num_agents, e);
}

Topology Topology::complete(int num_agents)
{
    std::vector<Edge> e;
    for (int u = 0; u < num_agents; ++u)
        for (int v = u + 1; v < num_agents; ++v)
            e.emplace_back(u, v);
    return Topology(num_agents, e);
}

std::vector<Edge> Topology::edges() const
{
    std::vector<Edge> out;
    for (int u = 0; u < num_agents(); ++u)
        for (int v : neighbors_[u])
            if (u < v)
                out.emplace_back(u, v);
    return out;
}

int Topology::max_degree() const
{
    std::size_t d = 0;
    for (const auto& n : neighbors_)
        d = std::max(d, n.size());
    return static_cast<int>(d);
}

Topology build_topology(TopologyKind kind, int num_agents, const std::vector<Edge>& custom_edges)
{
    switch (kind) {
    case TopologyKind::path:
        return Topology::path(num_agents);
    case TopologyKind::ring:
        return Topology::ring(num_agents);
    case TopologyKind::custom:
        return Topology(num_agents, custom_edges);
    }
    throw TopologyError("unknown topology kind");
}

int graph_diameter(const Topology& topology)
{
    const int n = topology.num_agents();
    int diameter = 0;
    std::vector<int> dist(n);
    for (int s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::queue<int> q;
        dist[s] = 0;
        q.push(s);
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (int w : topology.neighbors(v))
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    diameter = std::max(diameter, dist[w]);
                    q.push(w);
                }
        }
    }
    return diameter;
}

std::vector<Edge> read_edge_list(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw ParseError("cannot open edge list " + file.string());
    std::vector<Edge> edges;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ss(line);
        int u = 0;
        int v = 0;
        if (!(ss >> u)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            throw ParseError(file.string() + ":" + std::to_string(lineno) + ": expected \"u v\"");
        }
        std::string rest;
        if (!(ss >> v) || (ss >> rest))
            throw ParseError(file.string() + ":" + std::to_string(lineno) + ": expected \"u v\"");
        edges.emplace_back(u, v);
    }
    return edges;
}

void write_edge_list(const std::filesystem::path& file, const std::vector<Edge>& edges)
{
    std::ofstream out(file);
    if (!out)
        throw Error("cannot write edge list " + file.string());
    for (auto [u, v] : edges)
        out << u << ' ' << v << '\n';
}

void LinkFaultModel::validate() const
{
    if (!(drop_probability >= 0.0 && drop_probability < 1.0))
        throw InvalidInput("drop probability must lie in [0, 1)");
}

bool LinkFaultModel::dropped(long round, int u, int v) const
{
    if (drop_probability <= 0.0)
        return false;
    if (u > v)
        std::swap(u, v);
    std::uint64_t h = detail::splitmix64(seed);
    h = detail::splitmix64(h ^ static_cast<std::uint64_t>(round));
    h = detail::splitmix64(h ^ (static_cast<std::uint64_t>(u) << 32 | static_cast<std::uint32_t>(v)));
    return static_cast<double>(h >> 11) * 0x1.0p-53 < drop_probability;
}

std::vector<PriceMessage> deliver_to(const Topology& topology, const LinkFaultModel* fault,
                                     const std::vector<Vec>& prices, long round, int receiver)
{
    std::vector<PriceMessage> inbox;
    for (int w : topology.neighbors(receiver))
        if (!fault || !fault->dropped(round, receiver, w))
            inbox.push_back({w, &prices[w]});
    return inbox;
}

Inboxes exchange_round(const Topology& topology, const LinkFaultModel* fault, const std::vector<Vec>& prices,
                       long round)
{
    require_size(static_cast<long>(prices.size()), topology.num_agents(), "price payloads");
    Inboxes inboxes(prices.size());
    for (int v = 0; v < topology.num_agents(); ++v)
        inboxes[v] = deliver_to(topology, fault, prices, round, v);
    return inboxes;
}

}  // namespace pevcc
