#pragma once

#include <algorithm>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "ipoa/network.hpp"

namespace ipoa {

/// Single-source shortest paths under nonnegative edge weights.
/// `pred_edge[v]` is the incoming edge of v on its shortest path, -1 at the
/// origin and at unreachable nodes.
struct ShortestPathTree {
    int origin = -1;
    std::vector<double> dist;
    std::vector<int> pred_edge;

    bool reachable(int v) const {
        return dist[static_cast<std::size_t>(v)] < std::numeric_limits<double>::infinity();
    }
};

/// Dijkstra with deterministic tie-breaking: nodes leave the queue in
/// (distance, node index) order, edges relax in declaration order, and only
/// strict improvements update the tree, so the predecessor graph stays
/// acyclic (zero-weight edges included) and reconstructed paths are
/// reproducible across runs. Parallel equal-cost links resolve to the
/// first-declared edge.
inline ShortestPathTree shortest_path_tree(const Network& net, std::span<const double> weights,
                                           int origin) {
    if (static_cast<int>(weights.size()) != net.num_edges())
        throw std::invalid_argument("shortest_path_tree: one weight per edge required");
    for (double w : weights)
        if (!(w >= 0.0))
            throw std::domain_error("shortest_path_tree: negative edge weight rejected");

    ShortestPathTree tree;
    tree.origin = origin;
    tree.dist.assign(static_cast<std::size_t>(net.num_nodes()),
                     std::numeric_limits<double>::infinity());
    tree.pred_edge.assign(static_cast<std::size_t>(net.num_nodes()), -1);
    tree.dist[static_cast<std::size_t>(origin)] = 0.0;

    using Item = std::pair<double, int>;  // (distance, node)
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
    queue.emplace(0.0, origin);
    const auto& adjacency = net.adjacency();

    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (d > tree.dist[static_cast<std::size_t>(u)]) continue;  // stale entry
        for (int e : adjacency[static_cast<std::size_t>(u)]) {
            const int v = net.edge(e).head;
            const double candidate = d + weights[static_cast<std::size_t>(e)];
            double& dv = tree.dist[static_cast<std::size_t>(v)];
            if (candidate < dv) {
                dv = candidate;
                tree.pred_edge[static_cast<std::size_t>(v)] = e;
                queue.emplace(candidate, v);
            }
        }
    }
    return tree;
}

/// Edge sequence from the tree's origin to `destination`.
inline std::vector<int> extract_path(const Network& net, const ShortestPathTree& tree,
                                     int destination) {
    if (!tree.reachable(destination))
        throw std::runtime_error("extract_path: destination unreachable from origin");
    std::vector<int> path;
    int v = destination;
    while (v != tree.origin) {
        const int e = tree.pred_edge[static_cast<std::size_t>(v)];
        path.push_back(e);
        v = net.edge(e).tail;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

/// Loads every demand entirely onto its group's shortest path under the given
/// per-group edge weights: the extreme point of the flow polytope maximizing
/// the linearized objective. Throws when an OD pair with positive demand is
/// unreachable.
inline FlowState all_or_nothing(const Network& net, const std::vector<TravelerGroup>& groups,
                                const std::vector<Demand>& demands,
                                const std::vector<std::vector<double>>& group_weights) {
    if (group_weights.size() != groups.size())
        throw std::invalid_argument("all_or_nothing: one weight vector per group required");
    FlowState flows = FlowState::zeros(static_cast<int>(groups.size()), net.num_edges());

    for (std::size_t g = 0; g < groups.size(); ++g) {
        // One tree per distinct origin of this group.
        std::vector<int> order;
        for (std::size_t i = 0; i < demands.size(); ++i)
            if (demands[i].group == static_cast<int>(g) && demands[i].trips > 0.0)
                order.push_back(static_cast<int>(i));
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return demands[static_cast<std::size_t>(a)].origin <
                   demands[static_cast<std::size_t>(b)].origin;
        });

        ShortestPathTree tree;
        int tree_origin = -1;
        for (int i : order) {
            const Demand& d = demands[static_cast<std::size_t>(i)];
            if (d.origin != tree_origin) {
                tree = shortest_path_tree(net, group_weights[g], d.origin);
                tree_origin = d.origin;
            }
            if (!tree.reachable(d.destination))
                throw std::runtime_error(
                    "all_or_nothing: demand from '" + net.node_name(d.origin) + "' to '" +
                    net.node_name(d.destination) + "' has no feasible path");
            int v = d.destination;
            while (v != d.origin) {
                const int e = tree.pred_edge[static_cast<std::size_t>(v)];
                flows.flow(static_cast<int>(g), e) += d.trips;
                v = net.edge(e).tail;
            }
        }
    }
    return flows;
}

}  // namespace ipoa
