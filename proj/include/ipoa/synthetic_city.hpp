#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ipoa/network.hpp"
#include "ipoa/shortest_path.hpp"

namespace ipoa {

namespace detail {

/// Self-contained generator primitives so instances are byte-identical for a
/// given seed independent of the standard library's distribution internals.
struct CityRng {
    std::uint64_t state;

    explicit CityRng(std::uint64_t seed) : state(seed ^ 0x9e3779b97f4a7c15ull) {
        next();
        next();
    }

    std::uint64_t next() {  // splitmix64
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t below(std::uint64_t n) { return next() % n; }

    double real() {  // in [0, 1)
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
    }
};

}  // namespace detail

/// Deterministic random city: a jittered grid with a serpentine Hamiltonian
/// cycle (strong connectivity), densified by neighbor and chord edges up to
/// the exact edge budget; BPR links with the customary a = 0.15, b = 4;
/// three traveler groups ordered business > commuting > leisure by value of
/// time; gravity-flavored integer OD demand summing exactly to `trips`.
inline Instance generate_synthetic_city(int nodes, int edges, long trips, std::uint64_t seed) {
    if (nodes < 2) throw std::invalid_argument("generate_synthetic_city: need at least 2 nodes");
    if (edges < nodes)
        throw std::invalid_argument(
            "generate_synthetic_city: strong connectivity needs at least one edge per node");
    if (static_cast<long>(edges) > static_cast<long>(nodes) * (nodes - 1))
        throw std::invalid_argument("generate_synthetic_city: edge count exceeds simple digraph");
    if (trips < 1) throw std::invalid_argument("generate_synthetic_city: need at least one trip");

    detail::CityRng rng(seed);
    Instance instance;
    instance.name = "synthetic-city-n" + std::to_string(nodes) + "-e" + std::to_string(edges) +
                    "-t" + std::to_string(trips) + "-s" + std::to_string(seed);

    const int grid_w = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(nodes))));
    const double spacing = 0.8;  // km between grid columns/rows
    std::vector<std::pair<double, double>> position(static_cast<std::size_t>(nodes));
    for (int v = 0; v < nodes; ++v) {
        const int col = v % grid_w, row = v / grid_w;
        position[static_cast<std::size_t>(v)] = {
            spacing * (col + 0.5 * (rng.real() - 0.5)),
            spacing * (row + 0.5 * (rng.real() - 0.5))};
        instance.network.add_node("n" + std::to_string(v));
    }
    auto distance = [&](int a, int b) {
        const auto& pa = position[static_cast<std::size_t>(a)];
        const auto& pb = position[static_cast<std::size_t>(b)];
        return std::hypot(pa.first - pb.first, pa.second - pb.second);
    };

    // Serpentine order over the grid keeps consecutive nodes physically close.
    std::vector<int> order;
    for (int row = 0; row * grid_w < nodes; ++row) {
        const int begin = row * grid_w;
        const int end = std::min(begin + grid_w, nodes);
        if (row % 2 == 0)
            for (int v = begin; v < end; ++v) order.push_back(v);
        else
            for (int v = end; v-- > begin;) order.push_back(v);
    }

    std::set<std::pair<int, int>> present;
    int edge_count = 0;
    auto add_edge = [&](int tail, int head) {
        if (tail == head || present.count({tail, head})) return false;
        present.insert({tail, head});
        Edge e;
        e.id = "e" + std::to_string(edge_count);
        e.tail = tail;
        e.head = head;
        e.length = std::max(distance(tail, head), 0.05);
        static const double speeds[] = {0.5, 0.8, 1.0};       // km per minute
        static const double capacities[] = {400.0, 800.0, 1200.0};
        const std::size_t cls = static_cast<std::size_t>(rng.below(3));
        e.latency = LatencySpec::bpr(e.length / speeds[cls], capacities[cls]);
        e.toll = 0.0;
        instance.network.add_edge(e);
        ++edge_count;
        return true;
    };

    for (std::size_t i = 0; i < order.size(); ++i)
        add_edge(order[i], order[(i + 1) % order.size()]);

    // Densify with grid neighbors (reverse directions and side links) first,
    // then diagonals, then random chords until the budget is met.
    std::vector<std::pair<int, int>> candidates;
    const int offsets[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
    for (int v = 0; v < nodes; ++v) {
        const int col = v % grid_w, row = v / grid_w;
        for (const auto& off : offsets) {
            const int c2 = col + off[0], r2 = row + off[1];
            const int w = r2 * grid_w + c2;
            if (c2 < 0 || c2 >= grid_w || r2 < 0 || w >= nodes) continue;
            candidates.emplace_back(v, w);
            candidates.emplace_back(w, v);
        }
    }
    rng.shuffle(candidates);
    for (const auto& [tail, head] : candidates) {
        if (edge_count >= edges) break;
        add_edge(tail, head);
    }
    while (edge_count < edges) {
        const int tail = static_cast<int>(rng.below(static_cast<std::uint64_t>(nodes)));
        const int head = static_cast<int>(rng.below(static_cast<std::uint64_t>(nodes)));
        add_edge(tail, head);
    }

    // Traveler groups: value-of-time ladder, money-per-minute.
    instance.groups = {
        TravelerGroup{"business", "business", 1.0, 0.0, 1.0, 0.0},
        TravelerGroup{"commuting", "commuting", 0.5, 0.0, 1.0, 0.0},
        TravelerGroup{"leisure", "leisure", 0.25, 0.0, 1.0, 0.0},
    };
    const double group_share[] = {0.2, 0.5, 0.3};

    // Gravity-style OD pool: attraction times exponential distance decay.
    std::vector<double> attraction(static_cast<std::size_t>(nodes));
    for (double& a : attraction) a = 0.5 + rng.real();
    const double diameter = spacing * grid_w * 1.4142;
    const double decay = std::max(diameter * 0.3, 1e-6);

    const long max_pairs = static_cast<long>(nodes) * (nodes - 1);
    const long want_pairs = std::min<long>(max_pairs, std::max<long>(30, 3L * nodes));
    std::set<std::pair<int, int>> od_set;
    std::vector<std::pair<int, int>> od_pairs;
    long guard = 0;
    while (static_cast<long>(od_pairs.size()) < want_pairs && guard++ < 50 * want_pairs) {
        const int o = static_cast<int>(rng.below(static_cast<std::uint64_t>(nodes)));
        const int d = static_cast<int>(rng.below(static_cast<std::uint64_t>(nodes)));
        if (o == d || od_set.count({o, d})) continue;
        od_set.insert({o, d});
        od_pairs.emplace_back(o, d);
    }

    // Integer trip allocation by largest remainder: totals match exactly.
    struct Cell {
        int od;
        int group;
        double weight;
        long base = 0;
        double frac = 0.0;
    };
    std::vector<Cell> cells;
    double weight_sum = 0.0;
    for (std::size_t p = 0; p < od_pairs.size(); ++p) {
        const auto [o, d] = od_pairs[p];
        const double w =
            attraction[static_cast<std::size_t>(o)] * attraction[static_cast<std::size_t>(d)] *
            std::exp(-distance(o, d) / decay);
        for (int g = 0; g < 3; ++g) {
            cells.push_back({static_cast<int>(p), g, w * group_share[g]});
            weight_sum += w * group_share[g];
        }
    }
    long allocated = 0;
    for (Cell& c : cells) {
        const double quota = static_cast<double>(trips) * c.weight / weight_sum;
        c.base = static_cast<long>(std::floor(quota));
        c.frac = quota - static_cast<double>(c.base);
        allocated += c.base;
    }
    std::vector<std::size_t> by_frac(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) by_frac[i] = i;
    std::stable_sort(by_frac.begin(), by_frac.end(),
                     [&](std::size_t a, std::size_t b) { return cells[a].frac > cells[b].frac; });
    for (long r = 0; r < trips - allocated; ++r) ++cells[by_frac[static_cast<std::size_t>(r)]].base;

    for (const Cell& c : cells) {
        if (c.base == 0) continue;
        Demand d;
        d.origin = od_pairs[static_cast<std::size_t>(c.od)].first;
        d.destination = od_pairs[static_cast<std::size_t>(c.od)].second;
        d.group = c.group;
        d.trips = static_cast<double>(c.base);
        instance.demands.push_back(d);
    }

    // Reservation costs: a generous multiple of the worst free-flow trip cost
    // so utilities stay positive under congestion and modest tolls.
    std::vector<double> freeflow_time(static_cast<std::size_t>(instance.network.num_edges()));
    for (int e = 0; e < instance.network.num_edges(); ++e)
        freeflow_time[static_cast<std::size_t>(e)] = instance.network.edge(e).latency.t0;
    double worst_time = 0.0;
    int last_origin = -1;
    ShortestPathTree tree;
    std::vector<Demand> sorted = instance.demands;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Demand& a, const Demand& b) { return a.origin < b.origin; });
    for (const Demand& d : sorted) {
        if (d.origin != last_origin) {
            tree = shortest_path_tree(instance.network, freeflow_time, d.origin);
            last_origin = d.origin;
        }
        worst_time = std::max(worst_time, tree.dist[static_cast<std::size_t>(d.destination)]);
    }
    for (TravelerGroup& g : instance.groups) g.c_max = 25.0 * g.vot * worst_time + 10.0;

    instance.validate();
    return instance;
}

}  // namespace ipoa
