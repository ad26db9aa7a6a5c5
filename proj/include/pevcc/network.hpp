#pragma once

#include "pevcc/fleet.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace pevcc {

using Edge = std::pair<int, int>;

// Undirected, connected communication graph without self-loops.
class Topology {
public:
    Topology() = default;
    // Duplicate and reversed edges are merged; self-loops, out-of-range endpoints
    // and disconnected graphs throw TopologyError.
    Topology(int num_agents, const std::vector<Edge>& edges);

    static Topology path(int num_agents);
    static Topology ring(int num_agents);
    static Topology complete(int num_agents);

    int num_agents() const { return static_cast<int>(neighbors_.size()); }
    const std::vector<int>& neighbors(int v) const { return neighbors_.at(v); }
    std::vector<Edge> edges() const;  // u < v, sorted
    int max_degree() const;

private:
    std::vector<std::vector<int>> neighbors_;
};

enum class TopologyKind { path, ring, custom };

Topology build_topology(TopologyKind kind, int num_agents, const std::vector<Edge>& custom_edges = {});

// Exact unweighted diameter via breadth-first search from every vertex.
int graph_diameter(const Topology& topology);

// Edge list text: one "u v" pair per line, 0-indexed; '#' starts a comment.
std::vector<Edge> read_edge_list(const std::filesystem::path& file);
void write_edge_list(const std::filesystem::path& file, const std::vector<Edge>& edges);

// Per-link, per-round symmetric packet drops. The decision is a pure hash of
// (seed, round, link), so any round can be replayed without advancing state.
struct LinkFaultModel {
    double drop_probability = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
    bool dropped(long round, int u, int v) const;
};

// The only thing agents exchange. The price points into the sender's payload
// for the current round.
struct PriceMessage {
    int sender = 0;
    const Vec* price = nullptr;
};

using Inboxes = std::vector<std::vector<PriceMessage>>;

Inboxes exchange_round(const Topology& topology, const LinkFaultModel* fault, const std::vector<Vec>& prices,
                       long round);

// Same delivery set for a single receiver, used by serial sweeps.
std::vector<PriceMessage> deliver_to(const Topology& topology, const LinkFaultModel* fault,
                                     const std::vector<Vec>& prices, long round, int receiver);

}  // namespace pevcc
