#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipoa/latency.hpp"

namespace ipoa {

/// Directed congestible road segment. `toll` is money per trip, `length` a
/// physical distance used by per-distance toll sweeps.
struct Edge {
    std::string id;
    int tail = -1;
    int head = -1;
    LatencySpec latency;
    double toll = 0.0;
    double length = 1.0;
};

/// A class of identical travelers. `vot` converts travel time to money.
/// `c_max` is the reservation cost: the generalized cost at which a traveler
/// would rather not travel at all; surpluses are measured against it.
/// `toll_scale` rescales how this group perceives monetary charges and
/// `base_cost` is a fixed per-trip monetary overhead (access, parking,
/// anything accumulated outside the modeled network). The defaults (1, 0)
/// make the generalized cost exactly vot * time + toll.
struct TravelerGroup {
    std::string id;
    std::string label;
    double vot = 1.0;
    double c_max = 0.0;
    double toll_scale = 1.0;
    double base_cost = 0.0;

    void validate() const {
        if (!(vot > 0.0)) throw std::invalid_argument("group '" + id + "': vot must be > 0");
        if (!std::isfinite(c_max))
            throw std::invalid_argument("group '" + id + "': c_max must be finite");
        if (!(toll_scale >= 0.0))
            throw std::invalid_argument("group '" + id + "': toll_scale must be >= 0");
    }
};

/// Trips of one group between one OD pair. Non-atomic: `trips` is real-valued.
struct Demand {
    int origin = -1;
    int destination = -1;
    int group = -1;
    double trips = 0.0;
};

/// Directed graph over congestible edges. Nodes are referenced by index;
/// `node_names` keeps the external labels for I/O and error messages.
class Network {
public:
    int add_node(std::string name) {
        node_names_.push_back(std::move(name));
        adjacency_dirty_ = true;
        return static_cast<int>(node_names_.size()) - 1;
    }

    int add_edge(Edge e, bool allow_self_loop = false) {
        if (e.tail < 0 || e.tail >= num_nodes() || e.head < 0 || e.head >= num_nodes())
            throw std::invalid_argument("edge '" + e.id + "': endpoint out of range");
        if (e.tail == e.head && !allow_self_loop)
            throw std::invalid_argument("edge '" + e.id + "': self-loops are rejected");
        if (!(e.toll >= 0.0)) throw std::invalid_argument("edge '" + e.id + "': toll must be >= 0");
        if (!(e.length >= 0.0))
            throw std::invalid_argument("edge '" + e.id + "': length must be >= 0");
        e.latency.validate();
        edges_.push_back(std::move(e));
        adjacency_dirty_ = true;
        return static_cast<int>(edges_.size()) - 1;
    }

    int num_nodes() const { return static_cast<int>(node_names_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }

    const Edge& edge(int e) const { return edges_.at(static_cast<std::size_t>(e)); }
    Edge& edge_mut(int e) {
        adjacency_dirty_ = true;  // latency/toll edits are fine; endpoints should not change
        return edges_.at(static_cast<std::size_t>(e));
    }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<std::string>& node_names() const { return node_names_; }
    const std::string& node_name(int v) const { return node_names_.at(static_cast<std::size_t>(v)); }

    std::optional<int> find_node(const std::string& name) const {
        for (int v = 0; v < num_nodes(); ++v)
            if (node_names_[static_cast<std::size_t>(v)] == name) return v;
        return std::nullopt;
    }
    std::optional<int> find_edge(const std::string& id) const {
        for (int e = 0; e < num_edges(); ++e)
            if (edges_[static_cast<std::size_t>(e)].id == id) return e;
        return std::nullopt;
    }

    /// Outgoing edge indices per node. Rebuilt lazily after mutation; call once
    /// before concurrent read-only use.
    const std::vector<std::vector<int>>& adjacency() const {
        if (adjacency_dirty_) {
            adjacency_.assign(static_cast<std::size_t>(num_nodes()), {});
            for (int e = 0; e < num_edges(); ++e)
                adjacency_[static_cast<std::size_t>(edges_[static_cast<std::size_t>(e)].tail)]
                    .push_back(e);
            adjacency_dirty_ = false;
        }
        return adjacency_;
    }

private:
    std::vector<std::string> node_names_;
    std::vector<Edge> edges_;
    mutable std::vector<std::vector<int>> adjacency_;
    mutable bool adjacency_dirty_ = true;
};

/// Per-group edge flows; the solvers' sole mutable state. The aggregate edge
/// flow is always reconstructed as the sum over groups, never stored.
struct FlowState {
    int num_groups = 0;
    int num_edges = 0;
    std::vector<std::vector<double>> group_flow;  // [group][edge]

    static FlowState zeros(int groups, int edges) {
        FlowState f;
        f.num_groups = groups;
        f.num_edges = edges;
        f.group_flow.assign(static_cast<std::size_t>(groups),
                            std::vector<double>(static_cast<std::size_t>(edges), 0.0));
        return f;
    }

    double flow(int group, int e) const {
        return group_flow[static_cast<std::size_t>(group)][static_cast<std::size_t>(e)];
    }
    double& flow(int group, int e) {
        return group_flow[static_cast<std::size_t>(group)][static_cast<std::size_t>(e)];
    }

    double edge_flow(int e) const {
        double total = 0.0;
        for (const auto& gf : group_flow) total += gf[static_cast<std::size_t>(e)];
        return total;
    }

    std::vector<double> edge_totals() const {
        std::vector<double> totals(static_cast<std::size_t>(num_edges), 0.0);
        for (const auto& gf : group_flow)
            for (int e = 0; e < num_edges; ++e) totals[static_cast<std::size_t>(e)] += gf[static_cast<std::size_t>(e)];
        return totals;
    }

    /// x + gamma * (y - x), the Frank-Wolfe update.
    static FlowState combine(const FlowState& x, const FlowState& y, double gamma) {
        FlowState out = FlowState::zeros(x.num_groups, x.num_edges);
        for (int g = 0; g < x.num_groups; ++g)
            for (int e = 0; e < x.num_edges; ++e)
                out.flow(g, e) = x.flow(g, e) + gamma * (y.flow(g, e) - x.flow(g, e));
        return out;
    }

    double max_abs_diff(const FlowState& other) const {
        double m = 0.0;
        for (int g = 0; g < num_groups; ++g)
            for (int e = 0; e < num_edges; ++e)
                m = std::max(m, std::abs(flow(g, e) - other.flow(g, e)));
        return m;
    }
};

/// A complete problem instance: graph, traveler groups, trip table.
struct Instance {
    std::string name;
    Network network;
    std::vector<TravelerGroup> groups;
    std::vector<Demand> demands;

    void validate() const {
        for (const auto& g : groups) g.validate();
        for (std::size_t i = 0; i < demands.size(); ++i) {
            const Demand& d = demands[i];
            if (d.origin < 0 || d.origin >= network.num_nodes() || d.destination < 0 ||
                d.destination >= network.num_nodes())
                throw std::invalid_argument("demand " + std::to_string(i) + ": node out of range");
            if (d.origin == d.destination)
                throw std::invalid_argument("demand " + std::to_string(i) +
                                            ": origin equals destination");
            if (d.group < 0 || d.group >= static_cast<int>(groups.size()))
                throw std::invalid_argument("demand " + std::to_string(i) + ": group out of range");
            if (!(d.trips >= 0.0) || !std::isfinite(d.trips))
                throw std::invalid_argument("demand " + std::to_string(i) +
                                            ": trips must be finite and >= 0");
        }
    }
};

/// Generalized money cost of one trip of `group` along `path` (a sequence of
/// edge indices) under the current flows: sum of vot * t_e(x_e) + toll_scale * toll_e,
/// plus the group's fixed per-trip base cost.
inline double path_cost(const Network& net, const TravelerGroup& group,
                        std::span<const int> path, const FlowState& flows) {
    double money = group.base_cost;
    int prev_head = -1;
    for (int e : path) {
        const Edge& edge = net.edge(e);
        if (prev_head >= 0 && edge.tail != prev_head)
            throw std::invalid_argument("path_cost: edges are not consecutive");
        prev_head = edge.head;
        money += group.vot * edge.latency.value(flows.edge_flow(e)) +
                 group.toll_scale * edge.toll;
    }
    return money;
}

/// Total trips of one group across all its OD pairs.
inline double group_trips(const std::vector<Demand>& demands, int group) {
    double n = 0.0;
    for (const Demand& d : demands)
        if (d.group == group) n += d.trips;
    return n;
}

/// Cost and utility summary of one traveler group at a flow pattern.
struct GroupEvaluation {
    double trips = 0.0;            // n_i
    double total_cost = 0.0;       // C_i, money, includes per-trip base cost
    double per_capita_cost = 0.0;  // C_i / n_i
    bool participating = false;    // n_i > 0
    double utility = 0.0;          // U_i = c_max - per-capita cost (when participating)
};

inline std::vector<GroupEvaluation> evaluate_groups(const Network& net,
                                                    const std::vector<TravelerGroup>& groups,
                                                    const std::vector<Demand>& demands,
                                                    const FlowState& flows) {
    const std::vector<double> totals = flows.edge_totals();
    std::vector<GroupEvaluation> out(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g)
        out[g].trips = group_trips(demands, static_cast<int>(g));
    for (int e = 0; e < net.num_edges(); ++e) {
        const Edge& edge = net.edge(e);
        const double t = edge.latency.value(totals[static_cast<std::size_t>(e)]);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const double x = flows.flow(static_cast<int>(g), e);
            if (x == 0.0) continue;
            out[g].total_cost += x * (groups[g].vot * t + groups[g].toll_scale * edge.toll);
        }
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        GroupEvaluation& ev = out[g];
        ev.total_cost += ev.trips * groups[g].base_cost;
        if (ev.trips > 0.0) {
            ev.participating = true;
            ev.per_capita_cost = ev.total_cost / ev.trips;
            ev.utility = groups[g].c_max - ev.per_capita_cost;
        }
    }
    return out;
}

/// Average travel utility U_i of one group, or nullopt for a group with no
/// demand (excluded, not an error). Throws when the reservation cost is
/// violated (U_i <= 0): the model assumes every participant strictly prefers
/// traveling.
inline std::optional<double> group_utility(const Network& net,
                                           const std::vector<TravelerGroup>& groups,
                                           const std::vector<Demand>& demands,
                                           const FlowState& flows, int group) {
    const auto evals = evaluate_groups(net, groups, demands, flows);
    const GroupEvaluation& ev = evals.at(static_cast<std::size_t>(group));
    if (!ev.participating) return std::nullopt;
    if (!(ev.utility > 0.0))
        throw std::domain_error("group '" + groups[static_cast<std::size_t>(group)].id +
                                "': reservation cost violated (utility " +
                                std::to_string(ev.utility) + " <= 0)");
    return ev.utility;
}

/// Throws if any participating group sits at or below its reservation cost.
inline void require_positive_utilities(const std::vector<TravelerGroup>& groups,
                                       const std::vector<GroupEvaluation>& evals) {
    for (std::size_t g = 0; g < groups.size(); ++g)
        if (evals[g].participating && !(evals[g].utility > 0.0))
            throw std::domain_error("group '" + groups[g].id +
                                    "': reservation cost violated (utility " +
                                    std::to_string(evals[g].utility) + " <= 0)");
}

/// Largest absolute node-balance violation over all groups: at every node,
/// outgoing minus incoming group flow must equal that group's net supply.
inline double flow_conservation_residual(const Network& net,
                                         const std::vector<TravelerGroup>& groups,
                                         const std::vector<Demand>& demands,
                                         const FlowState& flows) {
    double worst = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        std::vector<double> balance(static_cast<std::size_t>(net.num_nodes()), 0.0);
        for (const Demand& d : demands) {
            if (d.group != static_cast<int>(g)) continue;
            balance[static_cast<std::size_t>(d.origin)] += d.trips;
            balance[static_cast<std::size_t>(d.destination)] -= d.trips;
        }
        for (int e = 0; e < net.num_edges(); ++e) {
            const double x = flows.flow(static_cast<int>(g), e);
            balance[static_cast<std::size_t>(net.edge(e).tail)] -= x;
            balance[static_cast<std::size_t>(net.edge(e).head)] += x;
        }
        for (double b : balance) worst = std::max(worst, std::abs(b));
    }
    return worst;
}

}  // namespace ipoa
