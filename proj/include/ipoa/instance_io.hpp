#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipoa/finite_game.hpp"
#include "ipoa/network.hpp"
#include "ipoa/poa.hpp"

// Instance file schema (single self-describing JSON document):
//
// {
//   "name": "pigou",
//   "nodes": ["o", "d"],
//   "edges": [
//     {"id": "upper", "tail": "o", "head": "d",
//      "latency": {"type": "polynomial", "coeffs": [1.0]},
//      "toll": 0.0, "length": 1.0},
//     {"id": "lower", "tail": "o", "head": "d",
//      "latency": {"type": "bpr", "t0": 10, "capacity": 100, "a": 0.15, "b": 4}}
//   ],
//   "groups": [{"id": "g", "label": "commuting", "vot": 1.0, "c_max": 2.0,
//               "toll_scale": 1.0, "base_cost": 0.0}],
//   "demands": [{"origin": "o", "destination": "d", "group": "g", "n": 1.0}]
// }
//
// Finite game schema:
//
// {"name": "...", "strategies": [2, 2], "c_max": [10, 10],
//  "costs": [[1, 3, 3, 2], [1, 3, 3, 2]]}
//
// where costs[i] lists player i's cost over strategy profiles in row-major
// order (the last player's strategy varies fastest).

namespace ipoa {

namespace detail {

inline nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& ex) {
        throw std::runtime_error("'" + path + "': " + ex.what());
    }
}

inline double finite_number(const nlohmann::json& j, const std::string& context) {
    if (!j.is_number()) throw std::runtime_error(context + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw std::runtime_error(context + ": number must be finite");
    return v;
}

}  // namespace detail

inline Instance instance_from_json(const nlohmann::json& j, const std::string& origin_hint = "") {
    auto fail = [&](const std::string& msg) -> std::runtime_error {
        return std::runtime_error(origin_hint.empty() ? msg : origin_hint + ": " + msg);
    };
    Instance instance;
    instance.name = j.value("name", "");
    if (!j.contains("nodes") || !j["nodes"].is_array()) throw fail("missing 'nodes' array");
    for (const auto& n : j["nodes"]) {
        const std::string name = n.get<std::string>();
        if (instance.network.find_node(name)) throw fail("duplicate node '" + name + "'");
        instance.network.add_node(name);
    }

    if (!j.contains("edges") || !j["edges"].is_array()) throw fail("missing 'edges' array");
    for (const auto& je : j["edges"]) {
        Edge e;
        e.id = je.at("id").get<std::string>();
        const std::string tail = je.at("tail").get<std::string>();
        const std::string head = je.at("head").get<std::string>();
        const auto t = instance.network.find_node(tail);
        const auto h = instance.network.find_node(head);
        if (!t) throw fail("edge '" + e.id + "' references unknown node '" + tail + "'");
        if (!h) throw fail("edge '" + e.id + "' references unknown node '" + head + "'");
        e.tail = *t;
        e.head = *h;
        const auto& jl = je.at("latency");
        const std::string type = jl.at("type").get<std::string>();
        if (type == "bpr") {
            e.latency = LatencySpec::bpr(detail::finite_number(jl.at("t0"), "edge '" + e.id + "' t0"),
                                         detail::finite_number(jl.at("capacity"), "edge '" + e.id + "' capacity"),
                                         jl.contains("a") ? detail::finite_number(jl["a"], "edge a") : 0.15,
                                         jl.contains("b") ? detail::finite_number(jl["b"], "edge b") : 4.0);
        } else if (type == "polynomial") {
            std::vector<double> coeffs;
            for (const auto& c : jl.at("coeffs"))
                coeffs.push_back(detail::finite_number(c, "edge '" + e.id + "' coeffs"));
            e.latency = LatencySpec::polynomial(coeffs);
        } else {
            throw fail("edge '" + e.id + "': unknown latency type '" + type + "'");
        }
        e.toll = je.contains("toll") ? detail::finite_number(je["toll"], "edge toll") : 0.0;
        e.length = je.contains("length") ? detail::finite_number(je["length"], "edge length") : 1.0;
        try {
            instance.network.add_edge(e);
        } catch (const std::invalid_argument& ex) {
            throw fail(ex.what());
        }
    }

    if (!j.contains("groups") || !j["groups"].is_array()) throw fail("missing 'groups' array");
    for (const auto& jg : j["groups"]) {
        TravelerGroup g;
        g.id = jg.at("id").get<std::string>();
        g.label = jg.value("label", "");
        g.vot = detail::finite_number(jg.at("vot"), "group '" + g.id + "' vot");
        g.c_max = detail::finite_number(jg.at("c_max"), "group '" + g.id + "' c_max");
        if (jg.contains("toll_scale"))
            g.toll_scale = detail::finite_number(jg["toll_scale"], "group toll_scale");
        if (jg.contains("base_cost"))
            g.base_cost = detail::finite_number(jg["base_cost"], "group base_cost");
        for (const auto& existing : instance.groups)
            if (existing.id == g.id) throw fail("duplicate group '" + g.id + "'");
        g.validate();
        instance.groups.push_back(std::move(g));
    }

    if (!j.contains("demands") || !j["demands"].is_array()) throw fail("missing 'demands' array");
    for (const auto& jd : j["demands"]) {
        Demand d;
        const std::string o = jd.at("origin").get<std::string>();
        const std::string dest = jd.at("destination").get<std::string>();
        const std::string gid = jd.at("group").get<std::string>();
        const auto on = instance.network.find_node(o);
        const auto dn = instance.network.find_node(dest);
        if (!on) throw fail("demand references unknown node '" + o + "'");
        if (!dn) throw fail("demand references unknown node '" + dest + "'");
        d.origin = *on;
        d.destination = *dn;
        d.group = -1;
        for (std::size_t g = 0; g < instance.groups.size(); ++g)
            if (instance.groups[g].id == gid) d.group = static_cast<int>(g);
        if (d.group < 0) throw fail("demand references unknown group '" + gid + "'");
        d.trips = detail::finite_number(jd.at("n"), "demand n");
        instance.demands.push_back(d);
    }

    try {
        instance.validate();
    } catch (const std::invalid_argument& ex) {
        throw fail(ex.what());
    }
    // Reachability of every positive demand.
    for (const Demand& d : instance.demands) {
        if (d.trips <= 0.0) continue;
        std::vector<double> w(static_cast<std::size_t>(instance.network.num_edges()), 0.0);
        const auto tree = shortest_path_tree(instance.network, w, d.origin);
        if (!tree.reachable(d.destination))
            throw fail("demand from '" + instance.network.node_name(d.origin) + "' to '" +
                       instance.network.node_name(d.destination) + "' has no directed path");
    }
    return instance;
}

inline nlohmann::json instance_to_json(const Instance& instance) {
    nlohmann::json j;
    j["name"] = instance.name;
    j["nodes"] = nlohmann::json::array();
    for (const auto& n : instance.network.node_names()) j["nodes"].push_back(n);
    j["edges"] = nlohmann::json::array();
    for (const Edge& e : instance.network.edges()) {
        nlohmann::json je;
        je["id"] = e.id;
        je["tail"] = instance.network.node_name(e.tail);
        je["head"] = instance.network.node_name(e.head);
        if (e.latency.kind == LatencySpec::Kind::Bpr) {
            je["latency"] = {{"type", "bpr"},
                             {"t0", e.latency.t0},
                             {"capacity", e.latency.capacity},
                             {"a", e.latency.alpha},
                             {"b", e.latency.beta}};
        } else {
            je["latency"] = {{"type", "polynomial"}, {"coeffs", e.latency.coeffs}};
        }
        je["toll"] = e.toll;
        je["length"] = e.length;
        j["edges"].push_back(std::move(je));
    }
    j["groups"] = nlohmann::json::array();
    for (const TravelerGroup& g : instance.groups) {
        j["groups"].push_back({{"id", g.id},
                               {"label", g.label},
                               {"vot", g.vot},
                               {"c_max", g.c_max},
                               {"toll_scale", g.toll_scale},
                               {"base_cost", g.base_cost}});
    }
    j["demands"] = nlohmann::json::array();
    for (const Demand& d : instance.demands) {
        j["demands"].push_back({{"origin", instance.network.node_name(d.origin)},
                                {"destination", instance.network.node_name(d.destination)},
                                {"group", instance.groups[static_cast<std::size_t>(d.group)].id},
                                {"n", d.trips}});
    }
    return j;
}

inline Instance parse_instance(const std::string& path) {
    return instance_from_json(detail::load_json(path), path);
}

inline void write_instance(const Instance& instance, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << instance_to_json(instance).dump(2) << '\n';
}

inline FiniteGame game_from_json(const nlohmann::json& j, const std::string& origin_hint = "") {
    auto fail = [&](const std::string& msg) -> std::runtime_error {
        return std::runtime_error(origin_hint.empty() ? msg : origin_hint + ": " + msg);
    };
    FiniteGame game;
    game.name = j.value("name", "");
    if (!j.contains("strategies") || !j["strategies"].is_array())
        throw fail("missing 'strategies' array");
    for (const auto& s : j["strategies"]) game.strategy_counts.push_back(s.get<int>());
    if (!j.contains("c_max")) throw fail("missing 'c_max' array");
    for (const auto& c : j["c_max"]) game.c_max.push_back(detail::finite_number(c, "c_max"));
    if (!j.contains("costs")) throw fail("missing 'costs' array");
    for (const auto& row : j["costs"]) {
        std::vector<double> costs;
        for (const auto& c : row) costs.push_back(detail::finite_number(c, "costs"));
        game.costs.push_back(std::move(costs));
    }
    try {
        game.validate();
    } catch (const std::invalid_argument& ex) {
        throw fail(ex.what());
    }
    return game;
}

inline FiniteGame parse_game(const std::string& path) {
    return game_from_json(detail::load_json(path), path);
}

// ---------------------------------------------------------------------------
// Sweep CSV. Column order is part of the contract:
//   rate,spec,status,poa,poa_alt,welfare_opt,welfare_ne,ue_rel_gap,so_rel_gap,
//   so_iterations[,u_opt:<gid>,u_ne:<gid> per group in declaration order]
// Timing never enters the CSV so identical runs are byte-identical.
// ---------------------------------------------------------------------------

inline std::string csv_number(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.12g", v);
    return buffer;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows,
                             const std::vector<TravelerGroup>& groups) {
    std::ostringstream out;
    out << "rate,spec,status,poa,poa_alt,welfare_opt,welfare_ne,ue_rel_gap,so_rel_gap,so_iterations";
    for (const auto& g : groups) out << ",u_opt:" << g.id << ",u_ne:" << g.id;
    out << '\n';
    for (const SweepRow& row : rows) {
        out << csv_number(row.rate) << ',' << row.spec_name << ','
            << (row.ok ? "ok" : "failed");
        if (!row.ok) {
            out << ",,,,,,,";
            for (std::size_t g = 0; g < groups.size(); ++g) out << ",,";
            out << '\n';
            continue;
        }
        out << ',' << csv_number(row.poa) << ','
            << (row.poa_alt ? csv_number(*row.poa_alt) : std::string{}) << ','
            << csv_number(row.welfare_opt) << ',' << csv_number(row.welfare_ne) << ','
            << csv_number(row.ue_relative_gap) << ',' << csv_number(row.so_relative_gap) << ','
            << row.so_iterations;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            out << ',' << (g < row.u_star.size() ? csv_number(row.u_star[g]) : std::string{})
                << ',' << (g < row.u_ne.size() ? csv_number(row.u_ne[g]) : std::string{});
        }
        out << '\n';
    }
    return out.str();
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows,
                            const std::vector<TravelerGroup>& groups, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << sweep_csv(rows, groups);
}

// ---------------------------------------------------------------------------
// Sweep chart: a static SVG line plot, one curve per welfare spec.
// ---------------------------------------------------------------------------

inline std::string sweep_svg(const std::vector<SweepRow>& rows) {
    const int width = 860, height = 520;
    const double left = 80, right = 830, top = 40, bottom = 460;

    std::vector<std::string> specs;
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = std::numeric_limits<double>::infinity(), y_max = -y_min;
    for (const SweepRow& row : rows) {
        if (!row.ok) continue;
        if (std::find(specs.begin(), specs.end(), row.spec_name) == specs.end())
            specs.push_back(row.spec_name);
        x_min = std::min(x_min, row.rate);
        x_max = std::max(x_max, row.rate);
        y_min = std::min(y_min, row.poa);
        y_max = std::max(y_max, row.poa);
    }
    if (specs.empty()) throw std::runtime_error("sweep_svg: no successful rows to plot");
    if (x_max <= x_min) x_max = x_min + 1.0;
    if (y_max <= y_min) {
        y_min -= 0.5e-3;
        y_max += 0.5e-3;
    }
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (right - left); };
    auto sy = [&](double y) { return bottom - (y - y_min) / (y_max - y_min) * (bottom - top); };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b"};

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' viewBox='0 0 " << width << ' ' << height << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<line x1='" << left << "' y1='" << bottom << "' x2='" << right << "' y2='" << bottom
        << "' stroke='black'/>\n"
        << "<line x1='" << left << "' y1='" << top << "' x2='" << left << "' y2='" << bottom
        << "' stroke='black'/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double x = x_min + (x_max - x_min) * i / 5.0;
        const double y = y_min + (y_max - y_min) * i / 5.0;
        svg << "<line x1='" << sx(x) << "' y1='" << bottom << "' x2='" << sx(x) << "' y2='"
            << bottom + 5 << "' stroke='black'/>\n"
            << "<text x='" << sx(x) << "' y='" << bottom + 20
            << "' font-size='12' text-anchor='middle'>" << csv_number(x) << "</text>\n"
            << "<line x1='" << left - 5 << "' y1='" << sy(y) << "' x2='" << left << "' y2='"
            << sy(y) << "' stroke='black'/>\n"
            << "<text x='" << left - 8 << "' y='" << sy(y) + 4
            << "' font-size='12' text-anchor='end'>" << csv_number(y) << "</text>\n";
    }
    svg << "<text x='" << (left + right) / 2 << "' y='" << height - 15
        << "' font-size='14' text-anchor='middle'>toll rate (money per unit length)</text>\n"
        << "<text x='20' y='" << (top + bottom) / 2
        << "' font-size='14' text-anchor='middle' transform='rotate(-90 20 "
        << (top + bottom) / 2 << ")'>price of anarchy</text>\n";

    for (std::size_t s = 0; s < specs.size(); ++s) {
        svg << "<polyline fill='none' stroke='" << palette[s % 6] << "' stroke-width='2' points='";
        for (const SweepRow& row : rows)
            if (row.ok && row.spec_name == specs[s])
                svg << sx(row.rate) << ',' << sy(row.poa) << ' ';
        svg << "'/>\n";
        const double ly = top + 8 + 18.0 * static_cast<double>(s);
        svg << "<line x1='" << right - 150 << "' y1='" << ly << "' x2='" << right - 120
            << "' y2='" << ly << "' stroke='" << palette[s % 6] << "' stroke-width='2'/>\n"
            << "<text x='" << right - 112 << "' y='" << ly + 4 << "' font-size='13'>" << specs[s]
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

inline void write_sweep_svg(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << sweep_svg(rows);
}

}  // namespace ipoa
