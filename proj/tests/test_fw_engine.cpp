#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "ipoa/equilibrium.hpp"
#include "ipoa/frank_wolfe.hpp"
#include "ipoa/oracle.hpp"
#include "ipoa/shortest_path.hpp"
#include "ipoa/welfare.hpp"
#include "test_support.hpp"

using namespace ipoa;
using Catch::Approx;

TEST_CASE("shortest path tree basics", "[shortest_path]") {
    const Instance pigou = testing::make_pigou();
    const std::vector<double> weights{1.0, 3.0};
    const auto tree = shortest_path_tree(pigou.network, weights, 0);
    CHECK(tree.dist[0] == 0.0);
    CHECK(tree.dist[1] == 1.0);
    CHECK(tree.pred_edge[1] == 0);

    Network chain;
    const int o = chain.add_node("o");
    const int a = chain.add_node("a");
    const int d = chain.add_node("d");
    Edge e1;
    e1.id = "e1";
    e1.tail = o;
    e1.head = a;
    e1.latency = LatencySpec::constant(1.0);
    Edge e2 = e1;
    e2.id = "e2";
    e2.tail = a;
    e2.head = d;
    chain.add_edge(e1);
    chain.add_edge(e2);
    const auto chain_tree = shortest_path_tree(chain, std::vector<double>{2.0, 2.0}, o);
    CHECK(chain_tree.dist[static_cast<std::size_t>(d)] == Approx(4.0));
    CHECK(extract_path(chain, chain_tree, d) == std::vector<int>{0, 1});
}

TEST_CASE("shortest path rejects negative weights, ties break low", "[shortest_path]") {
    const Instance pigou = testing::make_pigou();
    CHECK_THROWS_AS(shortest_path_tree(pigou.network, std::vector<double>{1.0, -0.1}, 0),
                    std::domain_error);
    const auto tree = shortest_path_tree(pigou.network, std::vector<double>{1.0, 1.0}, 0);
    CHECK(tree.pred_edge[1] == 0);  // first-declared edge wins the tie
}

TEST_CASE("all-or-nothing loads each demand on one path", "[shortest_path]") {
    const Instance pigou = testing::make_pigou();
    const auto strict = all_or_nothing(pigou.network, pigou.groups, pigou.demands,
                                       {{1.0, 0.5}});
    CHECK(strict.flow(0, 0) == 0.0);
    CHECK(strict.flow(0, 1) == Approx(1.0));
    const auto tie = all_or_nothing(pigou.network, pigou.groups, pigou.demands, {{1.0, 1.0}});
    CHECK(tie.flow(0, 0) == Approx(1.0));
    CHECK(tie.flow(0, 1) == 0.0);
}

TEST_CASE("all-or-nothing with two groups aggregates both", "[shortest_path]") {
    // Hand oracle: group 0's weights favor the lower link, group 1's the upper.
    Instance two = testing::make_pigou();
    two.groups.push_back(TravelerGroup{"h", "business", 2.0, 10.0, 1.0, 0.0});
    two.demands.push_back(Demand{0, 1, 1, 2.0});
    const auto flows = all_or_nothing(two.network, two.groups, two.demands,
                                      {{1.0, 0.25}, {0.5, 0.75}});
    CHECK(flows.flow(0, 1) == Approx(1.0));
    CHECK(flows.flow(1, 0) == Approx(2.0));
    CHECK(flows.edge_flow(0) == Approx(2.0));
    CHECK(flows.edge_flow(1) == Approx(1.0));
    CHECK(flow_conservation_residual(two.network, two.groups, two.demands, flows) < 1e-12);
}

TEST_CASE("all-or-nothing reports infeasible demand", "[shortest_path]") {
    Instance broken;
    broken.network.add_node("o");
    broken.network.add_node("d");
    const int island = broken.network.add_node("island");
    Edge e;
    e.id = "e";
    e.tail = 0;
    e.head = 1;
    e.latency = LatencySpec::constant(1.0);
    broken.network.add_edge(e);
    broken.groups.push_back(TravelerGroup{"g", "", 1.0, 10.0, 1.0, 0.0});
    broken.demands.push_back(Demand{0, island, 0, 1.0});
    CHECK_THROWS_WITH(all_or_nothing(broken.network, broken.groups, broken.demands, {{1.0}}),
                      Catch::Matchers::ContainsSubstring("no feasible path"));
}

TEST_CASE("golden-section line search", "[fw]") {
    const double quad = golden_section_max(
        [](double g) { return -(g - 0.3) * (g - 0.3); }, 1e-7);
    CHECK(quad == Approx(0.3).margin(1e-6));
    const double boundary = golden_section_max([](double g) { return g; }, 1e-7);
    CHECK(boundary == Approx(1.0).margin(1e-6));
    // Non-finite region: the search retreats to the feasible side.
    const double guarded = golden_section_max(
        [](double g) {
            return g > 0.5 ? std::numeric_limits<double>::quiet_NaN() : g;
        },
        1e-7);
    CHECK(guarded <= 0.5);
    CHECK(guarded == Approx(0.5).margin(1e-3));
}

TEST_CASE("line search over flow segments", "[fw]") {
    const Instance pigou = testing::make_pigou();
    FlowState x = FlowState::zeros(1, 2);
    x.flow(0, 1) = 1.0;
    FlowState y = FlowState::zeros(1, 2);
    y.flow(0, 0) = 1.0;
    // Total cost of split (1-gamma on lower): (1-g)^2 + g; optimum at g = 1/2.
    const Objective negative_cost = [&](const FlowState& f) {
        const double lower = f.flow(0, 1);
        return -(lower * lower + f.flow(0, 0));
    };
    CHECK(line_search(negative_cost, x, y, 1e-7) == Approx(0.5).margin(1e-6));
    CHECK(line_search(negative_cost, x, x, 1e-7) == 0.0);
}

namespace {

MarginOracle pigou_ue_margins(const Instance& instance) {
    return [&instance](const FlowState& f) {
        return ue_margin_field(instance.network, instance.groups, f);
    };
}

}  // namespace

TEST_CASE("frank-wolfe solves the Pigou equilibrium and optimum", "[fw]") {
    const Instance pigou = testing::make_pigou();
    const Objective beckmann = [&](const FlowState& f) {
        return beckmann_objective(pigou.network, pigou.groups, f);
    };
    FWConfig cfg;
    cfg.tolerance = 1e-12;
    const FWResult ue = frank_wolfe(pigou.network, pigou.groups, pigou.demands,
                                    pigou_ue_margins(pigou), beckmann, cfg);
    // Independent oracle: two-route bisection equalizes costs at x_lower = 1.
    const auto split =
        oracle::bisection_ue_two_route(pigou.network, pigou.groups, pigou.demands[0]);
    CHECK(split.flow_b == Approx(1.0).margin(1e-9));
    CHECK(ue.flows.flow(0, 1) == Approx(split.flow_b).margin(1e-3));
    CHECK(ue.converged);

    // Utilitarian optimum: grid oracle at 1e-4 resolution concentrates on 0.5.
    const Objective negative_total_cost = [&](const FlowState& f) {
        const double lower = f.flow(0, 1);
        return -(lower * lower + f.flow(0, 0));
    };
    const auto grid = oracle::grid_search_assignment(pigou.network, pigou.groups, pigou.demands,
                                                     negative_total_cost, 1e-4);
    CHECK(grid.flows.flow(0, 1) == Approx(0.5).margin(1e-4));
    const MarginOracle so_margins = [&](const FlowState& f) {
        return margin_field(WelfareSpec::cuc0(), pigou.network, pigou.groups, pigou.demands, f);
    };
    const FWResult so = frank_wolfe(pigou.network, pigou.groups, pigou.demands, so_margins,
                                    negative_total_cost, cfg);
    CHECK(so.flows.flow(0, 1) == Approx(grid.flows.flow(0, 1)).margin(1e-3));
}

TEST_CASE("frank-wolfe on empty demand returns immediately", "[fw]") {
    Instance empty = testing::make_pigou();
    empty.demands.clear();
    const FWResult result = frank_wolfe(
        empty.network, empty.groups, empty.demands, pigou_ue_margins(empty),
        [&](const FlowState& f) { return beckmann_objective(empty.network, empty.groups, f); });
    CHECK(result.iterations == 0);
    CHECK(result.converged);
    CHECK(result.flows.edge_flow(0) == 0.0);
    CHECK(result.flows.edge_flow(1) == 0.0);
}

TEST_CASE("frank-wolfe trace is monotone and conserves flow", "[fw][property]") {
    const Instance net = testing::make_shared_bottleneck();
    FWConfig cfg;
    cfg.tolerance = 1e-11;
    const Objective beckmann = [&](const FlowState& f) {
        return beckmann_objective(net.network, net.groups, f);
    };
    const FWResult result = frank_wolfe(
        net.network, net.groups, net.demands,
        [&](const FlowState& f) { return ue_margin_field(net.network, net.groups, f); },
        beckmann, cfg);
    for (std::size_t t = 1; t < result.trace.size(); ++t)
        CHECK(result.trace[t] >= result.trace[t - 1] - 1e-9);
    CHECK(flow_conservation_residual(net.network, net.groups, net.demands, result.flows) < 1e-9);
}

TEST_CASE("frank-wolfe certifies small gaps on concave objectives", "[fw][property]") {
    const Instance pigou = testing::make_pigou();
    FWConfig cfg;
    cfg.tolerance = 1e-10;
    cfg.max_iterations = 2000;
    cfg.relative_gap_target = 1e-9;
    const Objective beckmann = [&](const FlowState& f) {
        return beckmann_objective(pigou.network, pigou.groups, f);
    };
    const FWResult result = frank_wolfe(pigou.network, pigou.groups, pigou.demands,
                                        pigou_ue_margins(pigou), beckmann, cfg);
    CHECK(result.converged);
    CHECK(std::abs(result.gap) <= 10.0 * 1e-10 + 1e-9 * std::abs(result.trace.back()));
}

TEST_CASE("positive margins are shifted with a warning", "[fw]") {
    const Instance pigou = testing::make_pigou();
    const MarginOracle bad_margins = [&](const FlowState&) {
        return MarginField{{0.5, -1.0}};  // positive entry on the first edge
    };
    std::vector<int> shifted;
    const auto weights = margins_to_weights(bad_margins(FlowState::zeros(1, 2)), &shifted);
    REQUIRE(shifted == std::vector<int>{0});
    CHECK(weights[0][0] == Approx(0.0));
    CHECK(weights[0][1] == Approx(1.5));

    const FWResult result = frank_wolfe(
        pigou.network, pigou.groups, pigou.demands, bad_margins,
        [&](const FlowState& f) { return beckmann_objective(pigou.network, pigou.groups, f); });
    CHECK_FALSE(result.warnings.empty());
}
