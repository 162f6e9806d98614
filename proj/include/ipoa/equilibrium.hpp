#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipoa/frank_wolfe.hpp"
#include "ipoa/network.hpp"
#include "ipoa/oracle.hpp"
#include "ipoa/shortest_path.hpp"

namespace ipoa {

/// Beckmann-style objective whose maximizer is the multi-class Wardrop
/// equilibrium: minus the latency integrals minus the toll terms in time
/// units, summed per group as (x_e^i / vot_i) * perceived toll.
inline double beckmann_objective(const Network& net, const std::vector<TravelerGroup>& groups,
                                 const FlowState& flows) {
    const auto totals = flows.edge_totals();
    double value = 0.0;
    for (int e = 0; e < net.num_edges(); ++e) {
        const Edge& edge = net.edge(e);
        value -= edge.latency.integral(totals[static_cast<std::size_t>(e)]);
        if (edge.toll != 0.0)
            for (std::size_t g = 0; g < groups.size(); ++g)
                value -= flows.flow(static_cast<int>(g), e) * groups[g].toll_scale * edge.toll /
                         groups[g].vot;
    }
    return value;
}

/// Time-unit generalized cost each group routes on: t_e(x_e) + toll / vot.
/// The gradient of the Beckmann objective, negated.
inline std::vector<std::vector<double>> ue_edge_weights(const Network& net,
                                                        const std::vector<TravelerGroup>& groups,
                                                        const FlowState& flows) {
    const auto totals = flows.edge_totals();
    std::vector<std::vector<double>> weights(
        groups.size(), std::vector<double>(static_cast<std::size_t>(net.num_edges()), 0.0));
    for (int e = 0; e < net.num_edges(); ++e) {
        const Edge& edge = net.edge(e);
        const double time = edge.latency.value(totals[static_cast<std::size_t>(e)]);
        for (std::size_t g = 0; g < groups.size(); ++g)
            weights[g][static_cast<std::size_t>(e)] =
                time + groups[g].toll_scale * edge.toll / groups[g].vot;
    }
    return weights;
}

inline MarginField ue_margin_field(const Network& net, const std::vector<TravelerGroup>& groups,
                                   const FlowState& flows) {
    auto weights = ue_edge_weights(net, groups, flows);
    for (auto& row : weights)
        for (double& w : row) w = -w;
    return weights;
}

struct UEResult {
    FlowState flows;
    double beckmann_value = 0.0;
    double relative_gap = 0.0;
    std::vector<GroupEvaluation> outcomes;
    FWResult diagnostics;
};

inline UEResult solve_user_equilibrium(const Network& net, const std::vector<TravelerGroup>& groups,
                                       const std::vector<Demand>& demands,
                                       const FWConfig& config = {},
                                       const FlowState* initial = nullptr) {
    for (const TravelerGroup& g : groups) g.validate();
    FWResult fw = frank_wolfe(
        net, groups, demands,
        [&](const FlowState& f) { return ue_margin_field(net, groups, f); },
        [&](const FlowState& f) { return beckmann_objective(net, groups, f); }, config, initial);
    UEResult result;
    result.beckmann_value = fw.trace.back();
    result.relative_gap = fw.relative_gap;
    result.outcomes = evaluate_groups(net, groups, demands, fw.flows);
    result.flows = std::move(fw.flows);
    fw.flows = FlowState{};
    result.diagnostics = std::move(fw);
    return result;
}

/// Worst relative Wardrop violation over (OD, group) pairs: for every used
/// path, its generalized cost may not exceed the cheapest path's by more than
/// the returned fraction. Path sets are enumerated, so this check is for
/// small (test) instances. A path counts as used when every edge on it
/// carries group flow above `use_tol` times the demand; Frank-Wolfe iterates
/// retain dust from early all-or-nothing loads, so flows below one part in a
/// thousand are read as unused.
inline double wardrop_residual(const Network& net, const std::vector<TravelerGroup>& groups,
                               const std::vector<Demand>& demands, const FlowState& flows,
                               int path_cap = 64, double use_tol = 1e-3) {
    double worst = 0.0;
    for (const Demand& d : demands) {
        if (d.trips <= 0.0) continue;
        const TravelerGroup& group = groups.at(static_cast<std::size_t>(d.group));
        const auto paths = oracle::enumerate_simple_paths(net, d.origin, d.destination, path_cap);
        double cheapest = std::numeric_limits<double>::infinity();
        std::vector<double> costs(paths.size());
        for (std::size_t p = 0; p < paths.size(); ++p) {
            costs[p] = path_cost(net, group, paths[p], flows);
            cheapest = std::min(cheapest, costs[p]);
        }
        for (std::size_t p = 0; p < paths.size(); ++p) {
            bool used = true;
            for (int e : paths[p])
                if (flows.flow(d.group, e) <= use_tol * std::max(1.0, d.trips)) {
                    used = false;
                    break;
                }
            if (!used) continue;
            worst = std::max(worst, (costs[p] - cheapest) / std::max(cheapest, 1e-12));
        }
    }
    return worst;
}

/// Re-solves the equilibrium from randomly perturbed all-or-nothing starts
/// and reports the largest aggregate edge-flow divergence from the reference
/// run. Supports the uniqueness assumption behind reading the computed UE as
/// the worst equilibrium: with strictly increasing latencies the aggregate
/// flow should not depend on the start.
inline double ue_aggregate_spread(const Network& net, const std::vector<TravelerGroup>& groups,
                                  const std::vector<Demand>& demands, const FWConfig& config,
                                  int restarts = 3, unsigned seed = 7) {
    const UEResult reference = solve_user_equilibrium(net, groups, demands, config);
    const auto ref_totals = reference.flows.edge_totals();
    std::mt19937 rng(seed);
    double spread = 0.0;
    for (int r = 0; r < restarts; ++r) {
        FlowState zero = FlowState::zeros(static_cast<int>(groups.size()), net.num_edges());
        auto weights = ue_edge_weights(net, groups, zero);
        for (auto& row : weights)
            for (double& w : row)
                w *= 1.0 + 0.5 * std::generate_canonical<double, 32>(rng);
        const FlowState start = all_or_nothing(net, groups, demands, weights);
        const UEResult run = solve_user_equilibrium(net, groups, demands, config, &start);
        const auto totals = run.flows.edge_totals();
        for (std::size_t e = 0; e < totals.size(); ++e)
            spread = std::max(spread, std::abs(totals[e] - ref_totals[e]));
    }
    return spread;
}

}  // namespace ipoa
