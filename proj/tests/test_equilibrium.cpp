#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ipoa/equilibrium.hpp"
#include "ipoa/oracle.hpp"
#include "ipoa/social_optimum.hpp"
#include "test_support.hpp"

using namespace ipoa;
using Catch::Approx;

TEST_CASE("beckmann objective closed forms", "[equilibrium]") {
    Instance single;
    const int o = single.network.add_node("o");
    const int d = single.network.add_node("d");
    Edge e;
    e.id = "e";
    e.tail = o;
    e.head = d;
    e.latency = LatencySpec::bpr(1.0, 1.0, 0.15, 4.0);
    single.network.add_edge(e);
    single.groups.push_back(TravelerGroup{"g", "", 1.0, 100.0, 1.0, 0.0});
    FlowState flows = FlowState::zeros(1, 1);
    flows.flow(0, 0) = 1.0;
    CHECK(beckmann_objective(single.network, single.groups, flows) == Approx(-1.03));
    CHECK(beckmann_objective(single.network, single.groups, FlowState::zeros(1, 1)) == 0.0);

    Instance tolled;
    tolled.network.add_node("o");
    tolled.network.add_node("d");
    Edge lin;
    lin.id = "lin";
    lin.tail = 0;
    lin.head = 1;
    lin.latency = LatencySpec::polynomial({0.0, 1.0});
    lin.toll = 1.0;
    tolled.network.add_edge(lin);
    tolled.groups.push_back(TravelerGroup{"g", "", 2.0, 100.0, 1.0, 0.0});
    FlowState two = FlowState::zeros(1, 1);
    two.flow(0, 0) = 2.0;
    CHECK(beckmann_objective(tolled.network, tolled.groups, two) == Approx(-3.0));
}

TEST_CASE("equilibrium edge weights are time plus toll in time units", "[equilibrium]") {
    Instance inst;
    inst.network.add_node("o");
    inst.network.add_node("d");
    Edge e;
    e.id = "e";
    e.tail = 0;
    e.head = 1;
    e.latency = LatencySpec::constant(10.0);
    e.toll = 2.0;
    inst.network.add_edge(e);
    inst.groups.push_back(TravelerGroup{"slow", "", 0.5, 100.0, 1.0, 0.0});
    const auto w = ue_edge_weights(inst.network, inst.groups, FlowState::zeros(1, 1));
    CHECK(w[0][0] == Approx(14.0));

    inst.network.edge_mut(0).toll = 0.0;
    const auto toll_free = ue_edge_weights(inst.network, inst.groups, FlowState::zeros(1, 1));
    CHECK(toll_free[0][0] == Approx(10.0));

    inst.network.edge_mut(0).latency = LatencySpec::constant(5.0);
    inst.network.edge_mut(0).toll = 2.0;
    inst.groups = {TravelerGroup{"a", "", 1.0, 100.0, 1.0, 0.0},
                   TravelerGroup{"b", "", 2.0, 100.0, 1.0, 0.0}};
    const auto per_group = ue_edge_weights(inst.network, inst.groups, FlowState::zeros(2, 1));
    CHECK(per_group[0][0] == Approx(7.0));
    CHECK(per_group[1][0] == Approx(6.0));
}

TEST_CASE("user equilibrium on the Pigou instance", "[equilibrium]") {
    const Instance pigou = testing::make_pigou();
    FWConfig cfg;
    cfg.tolerance = 1e-12;
    const UEResult ue = solve_user_equilibrium(pigou.network, pigou.groups, pigou.demands, cfg);
    const auto split =
        oracle::bisection_ue_two_route(pigou.network, pigou.groups, pigou.demands[0]);
    CHECK(ue.flows.flow(0, 1) == Approx(split.flow_b).margin(1e-3));
    CHECK(ue.outcomes[0].per_capita_cost == Approx(1.0).margin(1e-3));
    CHECK(wardrop_residual(pigou.network, pigou.groups, pigou.demands, ue.flows) <= 1e-3);
}

TEST_CASE("identical parallel links split evenly", "[equilibrium]") {
    const Instance twin = testing::make_identical_links(2, 3.0);
    const UEResult ue = solve_user_equilibrium(twin.network, twin.groups, twin.demands);
    CHECK(ue.flows.flow(0, 0) == Approx(1.5).margin(1e-3));
    CHECK(ue.flows.flow(0, 1) == Approx(1.5).margin(1e-3));
}

TEST_CASE("multi-class equilibrium agrees with the grid oracle", "[equilibrium]") {
    const Instance inst = testing::make_funnel();
    FWConfig cfg;
    cfg.tolerance = 1e-12;
    cfg.max_iterations = 4000;
    const UEResult ue = solve_user_equilibrium(inst.network, inst.groups, inst.demands, cfg);
    // The Beckmann objective is what the equilibrium maximizes; the oracle
    // searches path splits directly.
    const auto grid = oracle::grid_search_assignment(
        inst.network, inst.groups, inst.demands,
        [&](const FlowState& f) { return beckmann_objective(inst.network, inst.groups, f); },
        1e-3);
    for (int e = 0; e < inst.network.num_edges(); ++e)
        CHECK(ue.flows.edge_flow(e) == Approx(grid.flows.edge_flow(e)).margin(2e-3));
    CHECK(wardrop_residual(inst.network, inst.groups, inst.demands, ue.flows) <= 1e-3);
}

TEST_CASE("equilibrium is invariant to per-group affine cost transforms", "[equilibrium]") {
    const Instance base = testing::make_shared_bottleneck();
    Instance scaled = base;
    // Group 0's cost representation rescaled by 3 with an offset of 2 money:
    // vot, toll perception and the per-trip overhead all scale together.
    scaled.groups[0].vot *= 3.0;
    scaled.groups[0].toll_scale *= 3.0;
    scaled.groups[0].base_cost = 3.0 * scaled.groups[0].base_cost + 2.0;
    scaled.groups[0].c_max = 3.0 * scaled.groups[0].c_max + 2.0;
    FWConfig cfg;
    cfg.tolerance = 1e-12;
    const UEResult a = solve_user_equilibrium(base.network, base.groups, base.demands, cfg);
    const UEResult b = solve_user_equilibrium(scaled.network, scaled.groups, scaled.demands, cfg);
    CHECK(a.flows.max_abs_diff(b.flows) <= 1e-9);
    // Surpluses scale by exactly 3.
    CHECK(b.outcomes[0].utility == Approx(3.0 * a.outcomes[0].utility));
    CHECK(b.outcomes[1].utility == Approx(a.outcomes[1].utility));
}

TEST_CASE("equilibrium maximizes the Beckmann objective over feasible flows", "[equilibrium]") {
    const Instance pigou = testing::make_pigou();
    const UEResult ue = solve_user_equilibrium(pigou.network, pigou.groups, pigou.demands);
    const SOResult so = solve_social_optimum(pigou.network, pigou.groups, pigou.demands,
                                             WelfareSpec::cuc0());
    CHECK(beckmann_objective(pigou.network, pigou.groups, ue.flows) >=
          beckmann_objective(pigou.network, pigou.groups, so.flows) - 1e-9);
}

TEST_CASE("aggregate equilibrium flows are start-independent", "[equilibrium][property]") {
    FWConfig cfg;
    cfg.tolerance = 1e-11;
    cfg.max_iterations = 2000;
    CHECK(ue_aggregate_spread(testing::make_pigou().network, testing::make_pigou().groups,
                              testing::make_pigou().demands, cfg) <= 1e-3);
    const Instance inst = testing::make_shared_bottleneck();
    CHECK(ue_aggregate_spread(inst.network, inst.groups, inst.demands, cfg) <= 1e-3);
}
