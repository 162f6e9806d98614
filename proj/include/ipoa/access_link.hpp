#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipoa/equilibrium.hpp"
#include "ipoa/latency.hpp"
#include "ipoa/network.hpp"
#include "ipoa/poa.hpp"

namespace ipoa {

struct AccessLinkScenario {
    double b0 = 0.0;
    Instance augmented;
    PoAReport base_report;
    PoAReport augmented_report;
    /// Largest UE flow difference on the original edges between the base and
    /// the augmented instance. Constant access time must not move route
    /// choice, so this should vanish.
    double ue_flow_divergence = 0.0;
};

/// Builds the mandatory-access-segment construction: a fresh entry node wired
/// to the common origin by a constant-time edge of length b0 (time units),
/// with every demand re-rooted through it and each group's reservation cost
/// shifted by vot * b0 so surpluses are untouched.
///
/// The point of the exercise: the cost-ratio PoA drifts toward 1 as b0 grows
/// while the surplus-based invariant PoA stays put.
inline AccessLinkScenario access_link_scenario(const Instance& base, double b0,
                                               const std::vector<WelfareSpec>& specs = {WelfareSpec::cuc0()},
                                               const FWConfig& config = {}) {
    base.validate();
    if (base.demands.empty())
        throw std::invalid_argument("access_link_scenario: instance has no demand");
    if (!(b0 >= 0.0)) throw std::invalid_argument("access_link_scenario: b0 must be >= 0");
    const int entry_origin = base.demands.front().origin;
    for (const Demand& d : base.demands)
        if (d.origin != entry_origin)
            throw std::invalid_argument(
                "access_link_scenario: all demands must share one origin node");

    AccessLinkScenario scenario;
    scenario.b0 = b0;
    scenario.augmented = base;
    scenario.augmented.name = base.name + "+access";
    Network& net = scenario.augmented.network;
    const int entry = net.add_node("access-entry");
    Edge access;
    access.id = "access";
    access.tail = entry;
    access.head = entry_origin;
    access.latency = LatencySpec::constant(b0);
    net.add_edge(access);  // appended last: original edge indices are preserved
    for (Demand& d : scenario.augmented.demands) d.origin = entry;
    for (TravelerGroup& g : scenario.augmented.groups) g.c_max += g.vot * b0;

    scenario.base_report = compute_poa_report(base, specs, config);
    scenario.augmented_report = compute_poa_report(scenario.augmented, specs, config);

    const UEResult ue_base =
        solve_user_equilibrium(base.network, base.groups, base.demands, config);
    const UEResult ue_aug = solve_user_equilibrium(net, scenario.augmented.groups,
                                                   scenario.augmented.demands, config);
    for (int e = 0; e < base.network.num_edges(); ++e)
        for (std::size_t g = 0; g < base.groups.size(); ++g)
            scenario.ue_flow_divergence =
                std::max(scenario.ue_flow_divergence,
                         std::abs(ue_base.flows.flow(static_cast<int>(g), e) -
                                  ue_aug.flows.flow(static_cast<int>(g), e)));
    return scenario;
}

}  // namespace ipoa
