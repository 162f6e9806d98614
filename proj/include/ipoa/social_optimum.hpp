#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ipoa/equilibrium.hpp"
#include "ipoa/frank_wolfe.hpp"
#include "ipoa/network.hpp"
#include "ipoa/oracle.hpp"
#include "ipoa/welfare.hpp"

namespace ipoa {

struct SOResult {
    FlowState flows;
    double welfare = 0.0;  // exact welfare_value at the returned flows
    std::vector<GroupEvaluation> outcomes;
    int iterations = 0;
    double gap = 0.0;
    double relative_gap = 0.0;
    bool converged = false;
    int best_start = -1;  // which start produced the kept run
    std::vector<std::string> warnings;
};

namespace detail {

/// Welfare of a flow pattern; -infinity instead of a domain error when the
/// spec needs positive surpluses and the point violates them (so line search
/// can treat infeasible points as arbitrarily bad).
inline double guarded_welfare(const WelfareSpec& spec, const Network& net,
                              const std::vector<TravelerGroup>& groups,
                              const std::vector<Demand>& demands, const FlowState& flows,
                              bool smoothed_maxmin) {
    const auto evals = evaluate_groups(net, groups, demands, flows);
    const SurplusProfile profile = SurplusProfile::from_evaluations(evals);
    if (profile.surplus.empty()) return 0.0;
    if (spec.requires_positive_surplus() || (spec.cls == Comparability::CUC && spec.rho > 0.0) ||
        smoothed_maxmin)
        for (double u : profile.surplus)
            if (!(u > 0.0)) return -std::numeric_limits<double>::infinity();
    if (smoothed_maxmin) return smoothed_maxmin_value(spec, profile);
    return welfare_value(spec, profile);
}

/// Uniform split of every demand across its enumerated simple paths.
/// Returns false when the instance is too large to enumerate.
inline bool uniform_path_split(const Network& net, const std::vector<TravelerGroup>& groups,
                               const std::vector<Demand>& demands, int path_cap, FlowState& out) {
    out = FlowState::zeros(static_cast<int>(groups.size()), net.num_edges());
    int total_paths = 0;
    for (const Demand& d : demands) {
        if (d.trips <= 0.0) continue;
        std::vector<std::vector<int>> paths;
        try {
            paths = oracle::enumerate_simple_paths(net, d.origin, d.destination, path_cap);
        } catch (const std::runtime_error&) {
            return false;
        }
        if (paths.empty()) return false;
        total_paths += static_cast<int>(paths.size());
        if (total_paths > path_cap) return false;
        const double share = d.trips / static_cast<double>(paths.size());
        for (const auto& path : paths)
            for (int e : path) out.flow(d.group, e) += share;
    }
    return true;
}

}  // namespace detail

/// System-optimal assignment for the given comparability class: Frank-Wolfe
/// with the matching marginal-welfare oracle, run from several starts
/// (free-flow all-or-nothing, the user equilibrium, and a uniform path split
/// on small networks) keeping the best final welfare. The non-utilitarian
/// objectives are not concave in the flows, so multi-start is the guard
/// against settling into a poor basin.
inline SOResult solve_social_optimum(const Network& net, const std::vector<TravelerGroup>& groups,
                                     const std::vector<Demand>& demands, const WelfareSpec& spec,
                                     const FWConfig& config = {},
                                     const FlowState* ue_warm_start = nullptr) {
    spec.validate(groups.size());
    for (const TravelerGroup& g : groups) g.validate();

    const bool smoothed_ls = spec.is_maxmin() && spec.smoothed_maxmin_linesearch;
    Objective exact = [&](const FlowState& f) {
        return detail::guarded_welfare(spec, net, groups, demands, f, false);
    };
    Objective search_objective = [&, smoothed_ls](const FlowState& f) {
        return detail::guarded_welfare(spec, net, groups, demands, f, smoothed_ls);
    };

    SOResult best;
    best.welfare = -std::numeric_limits<double>::infinity();

    std::vector<std::pair<std::string, FlowState>> starts;
    // Start 0: all-or-nothing on the margin field of the empty network
    // (the engine's default initialization; passing nullptr selects it).
    // Start 1: warm start at the user equilibrium, which also guarantees the
    // returned welfare is at least the equilibrium welfare.
    FlowState ue_flows;
    if (ue_warm_start) {
        ue_flows = *ue_warm_start;
    } else {
        ue_flows = solve_user_equilibrium(net, groups, demands, config).flows;
    }
    starts.emplace_back("user-equilibrium", std::move(ue_flows));
    // Start 2: uniform split over enumerated paths, small networks only.
    FlowState uniform;
    if (detail::uniform_path_split(net, groups, demands, 32, uniform))
        starts.emplace_back("uniform-path-split", std::move(uniform));

    MarginOracle oracle_fn = [&](const FlowState& f) {
        return margin_field(spec, net, groups, demands, f);
    };

    for (int s = -1; s < static_cast<int>(starts.size()); ++s) {
        const FlowState* initial = s < 0 ? nullptr : &starts[static_cast<std::size_t>(s)].second;
        FWResult run = frank_wolfe(net, groups, demands, oracle_fn, search_objective, config, initial);
        const double exact_value = exact(run.flows);
        for (auto& w : run.warnings) best.warnings.push_back(std::move(w));
        if (exact_value > best.welfare) {
            best.welfare = exact_value;
            best.flows = std::move(run.flows);
            best.iterations = run.iterations;
            best.gap = run.gap;
            best.relative_gap = run.relative_gap;
            best.converged = run.converged;
            best.best_start = s + 1;
        }
    }

    if (!std::isfinite(best.welfare))
        throw std::domain_error(
            "solve_social_optimum (" + spec.name() +
            "): no feasible positive-surplus assignment found from any start");
    best.outcomes = evaluate_groups(net, groups, demands, best.flows);
    return best;
}

}  // namespace ipoa
