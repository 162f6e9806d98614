#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipoa/network.hpp"

// Brute-force ground truth for small instances. Everything here is written
// against the type definitions only and shares no code with the Frank-Wolfe
// solvers, so agreement between the two is evidence rather than tautology.

namespace ipoa::oracle {

/// All simple directed paths from `origin` to `destination`, as edge index
/// sequences in deterministic (edge-index ascending DFS) order. Throws once
/// more than `cap` paths are found.
inline std::vector<std::vector<int>> enumerate_simple_paths(const Network& net, int origin,
                                                            int destination, int cap = 1000) {
    std::vector<std::vector<int>> paths;
    std::vector<int> stack;
    std::vector<char> visited(static_cast<std::size_t>(net.num_nodes()), 0);
    const auto& adjacency = net.adjacency();

    std::function<void(int)> dfs = [&](int v) {
        if (v == destination) {
            if (static_cast<int>(paths.size()) >= cap)
                throw std::runtime_error(
                    "enumerate_simple_paths: more than " + std::to_string(cap) +
                    " paths; this instance is out of oracle range, use the solver");
            paths.push_back(stack);
            return;
        }
        visited[static_cast<std::size_t>(v)] = 1;
        for (int e : adjacency[static_cast<std::size_t>(v)]) {
            const int w = net.edge(e).head;
            if (visited[static_cast<std::size_t>(w)]) continue;
            stack.push_back(e);
            dfs(w);
            stack.pop_back();
        }
        visited[static_cast<std::size_t>(v)] = 0;
    };
    dfs(origin);
    return paths;
}

struct GridSearchResult {
    FlowState flows;
    double value = 0.0;
    long evaluations = 0;
};

namespace detail {

/// Splits of `total` over `parts` in steps of `step` (last part takes the
/// remainder so each split sums exactly to `total`).
inline void enumerate_splits(double total, int parts, double step,
                             std::vector<double>& current,
                             const std::function<void(const std::vector<double>&)>& emit) {
    const int depth = static_cast<int>(current.size());
    if (depth == parts - 1) {
        double used = 0.0;
        for (double c : current) used += c;
        current.push_back(total - used);
        emit(current);
        current.pop_back();
        return;
    }
    double used = 0.0;
    for (double c : current) used += c;
    const double remaining = total - used;
    const int ticks = static_cast<int>(std::floor(remaining / step + 1e-9));
    for (int k = 0; k <= ticks; ++k) {
        current.push_back(std::min(k * step, remaining));
        enumerate_splits(total, parts, step, current, emit);
        current.pop_back();
    }
}

}  // namespace detail

/// Exhaustive maximization of `objective` over path-flow splits of every
/// positive demand, on a simplex grid with spacing `resolution * demand`.
/// Intended for instances with at most `path_cap` total paths; throws when the
/// evaluation budget would be exceeded.
inline GridSearchResult grid_search_assignment(const Network& net,
                                               const std::vector<TravelerGroup>& groups,
                                               const std::vector<Demand>& demands,
                                               const std::function<double(const FlowState&)>& objective,
                                               double resolution, int path_cap = 6,
                                               long budget = 40'000'000) {
    if (!(resolution > 0.0) || resolution > 1.0)
        throw std::invalid_argument("grid_search_assignment: resolution must be in (0, 1]");

    struct Block {
        int demand_index;
        std::vector<std::vector<int>> paths;
    };
    std::vector<Block> blocks;
    int total_paths = 0;
    for (std::size_t i = 0; i < demands.size(); ++i) {
        const Demand& d = demands[i];
        if (d.trips <= 0.0) continue;
        Block b;
        b.demand_index = static_cast<int>(i);
        b.paths = enumerate_simple_paths(net, d.origin, d.destination, path_cap + 1);
        if (b.paths.empty())
            throw std::runtime_error("grid_search_assignment: demand has no feasible path");
        total_paths += static_cast<int>(b.paths.size());
        blocks.push_back(std::move(b));
    }
    if (total_paths > path_cap)
        throw std::runtime_error("grid_search_assignment: " + std::to_string(total_paths) +
                                 " paths exceed the oracle cap of " + std::to_string(path_cap));

    // Rough budget check: grid points multiply across demand blocks.
    double points = 1.0;
    for (const Block& b : blocks) {
        const double ticks = std::floor(1.0 / resolution + 1e-9) + 1.0;
        points *= std::pow(ticks, static_cast<int>(b.paths.size()) - 1);
        if (points > static_cast<double>(budget))
            throw std::runtime_error("grid_search_assignment: grid of ~" +
                                     std::to_string(points) + " points exceeds budget");
    }

    GridSearchResult best;
    best.flows = FlowState::zeros(static_cast<int>(groups.size()), net.num_edges());
    best.value = -std::numeric_limits<double>::infinity();

    FlowState scratch = FlowState::zeros(static_cast<int>(groups.size()), net.num_edges());
    std::vector<std::vector<double>> split(blocks.size());

    std::function<void(std::size_t)> recurse = [&](std::size_t bi) {
        if (bi == blocks.size()) {
            for (auto& gf : scratch.group_flow) std::fill(gf.begin(), gf.end(), 0.0);
            for (std::size_t k = 0; k < blocks.size(); ++k) {
                const Demand& d = demands[static_cast<std::size_t>(blocks[k].demand_index)];
                for (std::size_t p = 0; p < blocks[k].paths.size(); ++p)
                    for (int e : blocks[k].paths[p]) scratch.flow(d.group, e) += split[k][p];
            }
            const double value = objective(scratch);
            ++best.evaluations;
            if (value > best.value) {
                best.value = value;
                best.flows = scratch;
            }
            return;
        }
        const Demand& d = demands[static_cast<std::size_t>(blocks[bi].demand_index)];
        const double step = resolution * d.trips;
        std::vector<double> current;
        detail::enumerate_splits(d.trips, static_cast<int>(blocks[bi].paths.size()), step, current,
                                 [&](const std::vector<double>& s) {
                                     split[bi] = s;
                                     recurse(bi + 1);
                                 });
    };
    recurse(0);
    return best;
}

struct TwoRouteSplit {
    std::vector<int> route_a, route_b;
    double flow_a = 0.0, flow_b = 0.0;
    double cost_a = 0.0, cost_b = 0.0;
};

/// Wardrop split of a single demand over exactly two routes, found by
/// bisection on the route-cost difference (monotone for nondecreasing
/// latencies). Corner solutions are returned when one route dominates even at
/// full load.
inline TwoRouteSplit bisection_ue_two_route(const Network& net,
                                            const std::vector<TravelerGroup>& groups,
                                            const Demand& demand, int iterations = 200) {
    auto paths = enumerate_simple_paths(net, demand.origin, demand.destination, 3);
    if (paths.size() != 2)
        throw std::runtime_error("bisection_ue_two_route: instance must have exactly two routes");
    const TravelerGroup& group = groups.at(static_cast<std::size_t>(demand.group));

    // g(x) = cost of route_b minus cost of route_a when x rides on route_b.
    auto diff = [&](double x_b) {
        FlowState f = FlowState::zeros(static_cast<int>(groups.size()), net.num_edges());
        for (int e : paths[0]) f.flow(demand.group, e) += demand.trips - x_b;
        for (int e : paths[1]) f.flow(demand.group, e) += x_b;
        return path_cost(net, group, paths[1], f) - path_cost(net, group, paths[0], f);
    };

    TwoRouteSplit result;
    result.route_a = paths[0];
    result.route_b = paths[1];

    double lo = 0.0, hi = demand.trips;
    const double d_lo = diff(lo), d_hi = diff(hi);
    double x_b;
    if (d_lo >= 0.0) {
        x_b = 0.0;  // route_a dominates even when route_b is empty
    } else if (d_hi <= 0.0) {
        x_b = demand.trips;  // route_b dominates at full load
    } else {
        if (!(d_lo < 0.0 && d_hi > 0.0))
            throw std::runtime_error("bisection_ue_two_route: cost difference is not monotone");
        for (int it = 0; it < iterations; ++it) {
            const double mid = 0.5 * (lo + hi);
            (diff(mid) < 0.0 ? lo : hi) = mid;
        }
        x_b = 0.5 * (lo + hi);
    }

    result.flow_b = x_b;
    result.flow_a = demand.trips - x_b;
    FlowState f = FlowState::zeros(static_cast<int>(groups.size()), net.num_edges());
    for (int e : paths[0]) f.flow(demand.group, e) += result.flow_a;
    for (int e : paths[1]) f.flow(demand.group, e) += result.flow_b;
    result.cost_a = path_cost(net, group, paths[0], f);
    result.cost_b = path_cost(net, group, paths[1], f);
    return result;
}

}  // namespace ipoa::oracle
