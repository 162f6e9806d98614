#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipoa/frank_wolfe.hpp"
#include "ipoa/network.hpp"

namespace ipoa {

/// Which transformations of individual costs carry no meaning.
///   CNC: per-group positive affine maps; only the Nash (geometric) family of
///        aggregators ranks consistently.
///   CUC: a shared scale with per-group offsets; the isoelastic (Atkinson)
///        family, indexed by inequality aversion rho, is admissible.
enum class Comparability { CUC, CNC };

/// Selects the welfare aggregator and the matching marginal-welfare oracle.
/// rho = 0 is utilitarian, rho = 1 the log (Nash) form, rho = infinity the
/// exact max-min; `maxmin_rho` is the large-rho smooth surrogate for the
/// latter. Group weights default to 1 and are multiplied by group demand
/// unless `demand_weighted` is cleared.
struct WelfareSpec {
    Comparability cls = Comparability::CUC;
    double rho = 0.0;
    std::vector<double> weights;  // per group; empty means all ones
    double maxmin_rho = 50.0;
    bool demand_weighted = true;
    bool smoothed_maxmin_linesearch = false;

    static WelfareSpec cuc0() { return {}; }
    static WelfareSpec cnc() {
        WelfareSpec s;
        s.cls = Comparability::CNC;
        s.rho = 1.0;
        return s;
    }
    static WelfareSpec maxmin() {
        WelfareSpec s;
        s.rho = std::numeric_limits<double>::infinity();
        return s;
    }
    static WelfareSpec atkinson(double rho) {
        if (!(rho >= 0.0)) throw std::invalid_argument("atkinson: rho must be >= 0");
        WelfareSpec s;
        s.rho = rho;
        return s;
    }

    bool is_maxmin() const {
        return cls == Comparability::CUC && std::isinf(rho);
    }
    bool requires_positive_surplus() const {
        return cls == Comparability::CNC || rho >= 1.0;
    }

    double base_weight(int group) const {
        if (weights.empty()) return 1.0;
        return weights.at(static_cast<std::size_t>(group));
    }

    std::string name() const {
        if (cls == Comparability::CNC) return "cnc";
        if (rho == 0.0) return "cuc0";
        if (std::isinf(rho)) return "maxmin";
        std::ostringstream os;
        os << "atkinson:" << rho;
        return os.str();
    }

    void validate(std::size_t num_groups) const {
        if (!weights.empty() && weights.size() != num_groups)
            throw std::invalid_argument("welfare spec: one weight per group required");
        for (double w : weights)
            if (!(w > 0.0)) throw std::invalid_argument("welfare spec: weights must be > 0");
        if (!(rho >= 0.0)) throw std::invalid_argument("welfare spec: rho must be >= 0");
        if (!(maxmin_rho > 1.0))
            throw std::invalid_argument("welfare spec: maxmin_rho must be > 1");
    }
};

/// Per-group surpluses (cost savings) and demands at one flow pattern.
/// Only participating groups (n_i > 0) appear.
struct SurplusProfile {
    std::vector<double> surplus;   // U_i = c_max_i - per-capita cost
    std::vector<double> trips;     // n_i
    std::vector<int> group_index;  // original group indices, for error messages

    static SurplusProfile from_evaluations(const std::vector<GroupEvaluation>& evals) {
        SurplusProfile p;
        for (std::size_t g = 0; g < evals.size(); ++g) {
            if (!evals[g].participating) continue;
            p.surplus.push_back(evals[g].utility);
            p.trips.push_back(evals[g].trips);
            p.group_index.push_back(static_cast<int>(g));
        }
        return p;
    }
};

namespace detail {

inline double effective_weight(const WelfareSpec& spec, const SurplusProfile& p, std::size_t i) {
    const double w = spec.base_weight(p.group_index[i]);
    return spec.demand_weighted ? w * p.trips[i] : w;
}

inline void require_positive(const WelfareSpec& spec, const SurplusProfile& p) {
    for (std::size_t i = 0; i < p.surplus.size(); ++i)
        if (!(p.surplus[i] > 0.0))
            throw std::domain_error("welfare (" + spec.name() + "): group index " +
                                    std::to_string(p.group_index[i]) +
                                    " has non-positive surplus " + std::to_string(p.surplus[i]));
}

/// Atkinson sum with inequality aversion rho over positive surpluses,
/// computed in the log domain so large rho stays finite.
inline double atkinson_sum(const WelfareSpec& spec, const SurplusProfile& p, double rho) {
    if (rho == 1.0) {
        double acc = 0.0;
        for (std::size_t i = 0; i < p.surplus.size(); ++i)
            acc += effective_weight(spec, p, i) * std::log(p.surplus[i]);
        return acc;
    }
    const double q = 1.0 - rho;
    double acc = 0.0;
    for (std::size_t i = 0; i < p.surplus.size(); ++i)
        acc += effective_weight(spec, p, i) * std::exp(q * std::log(p.surplus[i]));
    return acc / q;
}

}  // namespace detail

/// Social welfare of a surplus profile under the spec's comparability class.
///   CUC(0):        sum of weighted surpluses (utilitarian)
///   CUC(rho):      isoelastic / Atkinson form
///   CUC(infinity): the minimum surplus (exact max-min)
///   CNC:           sum of weighted log surpluses (log form of the weighted
///                  Nash product; order-equivalent to the product itself)
inline double welfare_value(const WelfareSpec& spec, const SurplusProfile& profile) {
    if (profile.surplus.empty())
        throw std::domain_error("welfare_value: no participating groups");
    if (spec.requires_positive_surplus() || (spec.cls == Comparability::CUC && spec.rho > 0.0))
        detail::require_positive(spec, profile);

    if (spec.cls == Comparability::CNC) return detail::atkinson_sum(spec, profile, 1.0);
    if (spec.is_maxmin())
        return *std::min_element(profile.surplus.begin(), profile.surplus.end());
    if (spec.rho == 0.0) {
        double acc = 0.0;
        for (std::size_t i = 0; i < profile.surplus.size(); ++i)
            acc += detail::effective_weight(spec, profile, i) * profile.surplus[i];
        return acc;
    }
    return detail::atkinson_sum(spec, profile, spec.rho);
}

/// Smooth stand-in for the max-min objective: the Atkinson form at the spec's
/// `maxmin_rho`. Its ranking converges to the min-surplus ranking as the
/// smoothing parameter grows.
inline double smoothed_maxmin_value(const WelfareSpec& spec, const SurplusProfile& profile) {
    if (profile.surplus.empty())
        throw std::domain_error("smoothed_maxmin_value: no participating groups");
    detail::require_positive(spec, profile);
    return detail::atkinson_sum(spec, profile, spec.maxmin_rho);
}

namespace detail {

/// Shared per-edge quantities for the margin formulas.
struct EdgeContext {
    double time = 0.0;        // t_e(x_e)
    double slope = 0.0;       // t'_e(x_e)
    double vot_flow = 0.0;    // sum over groups of x_e^h * vot_h
};

inline EdgeContext edge_context(const Network& net, const std::vector<TravelerGroup>& groups,
                                const FlowState& flows, const std::vector<double>& totals, int e) {
    EdgeContext ctx;
    const double x = totals[static_cast<std::size_t>(e)];
    ctx.time = net.edge(e).latency.value(x);
    ctx.slope = net.edge(e).latency.derivative(x);
    for (std::size_t h = 0; h < groups.size(); ++h)
        ctx.vot_flow += flows.flow(static_cast<int>(h), e) * groups[h].vot;
    return ctx;
}

}  // namespace detail

/// Utilitarian marginal welfare of adding group-i flow to edge e: the direct
/// generalized cost to the group plus the congestion externality it imposes
/// on everyone sharing the edge. Always nonpositive.
inline double marginal_welfare_cuc0(const Network& net, const std::vector<TravelerGroup>& groups,
                                    const FlowState& flows, int group, int e) {
    const auto totals = flows.edge_totals();
    const auto ctx = detail::edge_context(net, groups, flows, totals, e);
    const TravelerGroup& gi = groups.at(static_cast<std::size_t>(group));
    return -(gi.vot * ctx.time + gi.toll_scale * net.edge(e).toll + ctx.slope * ctx.vot_flow);
}

/// Nash-product marginal welfare: the utilitarian terms, each normalized by
/// the affected group's total cost C_h. A scaled subgradient: it is the exact
/// gradient of -sum_h log C_h. Groups at zero cost fall back to utilitarian
/// scaling (weight 1) for their term.
inline double marginal_welfare_cnc(const Network& net, const std::vector<TravelerGroup>& groups,
                                   const std::vector<Demand>& demands, const FlowState& flows,
                                   int group, int e, std::vector<int>* zero_cost_groups = nullptr) {
    const auto evals = evaluate_groups(net, groups, demands, flows);
    const auto totals = flows.edge_totals();
    const auto ctx = detail::edge_context(net, groups, flows, totals, e);
    const TravelerGroup& gi = groups.at(static_cast<std::size_t>(group));

    auto inverse_cost = [&](std::size_t h) {
        if (evals[h].total_cost > 0.0) return 1.0 / evals[h].total_cost;
        if (zero_cost_groups) zero_cost_groups->push_back(static_cast<int>(h));
        return 1.0;  // utilitarian fallback for a zero-cost group
    };

    double coupling = 0.0;
    for (std::size_t h = 0; h < groups.size(); ++h) {
        const double x = flows.flow(static_cast<int>(h), e);
        if (x == 0.0) continue;
        coupling += x * groups[h].vot * inverse_cost(h);
    }
    const double direct =
        (gi.vot * ctx.time + gi.toll_scale * net.edge(e).toll) * inverse_cost(static_cast<std::size_t>(group));
    return -(direct + ctx.slope * coupling);
}

/// Index of the most disadvantaged group: the participating group with the
/// highest per-capita cost, ties broken by the lowest group index.
inline int worst_group_index(const std::vector<GroupEvaluation>& evals) {
    int k = -1;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < evals.size(); ++g) {
        if (!evals[g].participating) continue;
        if (evals[g].per_capita_cost > worst) {
            worst = evals[g].per_capita_cost;
            k = static_cast<int>(g);
        }
    }
    if (k < 0) throw std::domain_error("worst_group_index: no participating groups");
    return k;
}

/// Max-min marginal welfare: only the worst group's utility moves the
/// objective, so the margin is that group's direct cost (when i = k) plus the
/// congestion the added flow inflicts on it, per capita of the worst group.
inline double marginal_welfare_maxmin(const Network& net, const std::vector<TravelerGroup>& groups,
                                      const std::vector<Demand>& demands, const FlowState& flows,
                                      int group, int e) {
    const auto evals = evaluate_groups(net, groups, demands, flows);
    const int k = worst_group_index(evals);
    const auto totals = flows.edge_totals();
    const TravelerGroup& gk = groups.at(static_cast<std::size_t>(k));
    const double x = totals[static_cast<std::size_t>(e)];
    const double time = net.edge(e).latency.value(x);
    const double slope = net.edge(e).latency.derivative(x);
    const double direct =
        group == k ? gk.vot * time + gk.toll_scale * net.edge(e).toll : 0.0;
    const double induced = flows.flow(k, e) * gk.vot * slope;
    return -(direct + induced) / evals[static_cast<std::size_t>(k)].trips;
}

/// Batch margin field for the spec's comparability class; one entry per
/// (group, edge). Shares the per-edge precomputation across groups.
inline MarginField margin_field(const WelfareSpec& spec, const Network& net,
                                const std::vector<TravelerGroup>& groups,
                                const std::vector<Demand>& demands, const FlowState& flows,
                                std::vector<std::string>* warnings = nullptr) {
    const std::size_t G = groups.size();
    const int E = net.num_edges();
    MarginField margins(G, std::vector<double>(static_cast<std::size_t>(E), 0.0));
    const auto totals = flows.edge_totals();
    const auto evals = evaluate_groups(net, groups, demands, flows);

    if (spec.is_maxmin()) {
        const int k = worst_group_index(evals);
        const double nk = evals[static_cast<std::size_t>(k)].trips;
        const TravelerGroup& gk = groups[static_cast<std::size_t>(k)];
        for (int e = 0; e < E; ++e) {
            const double x = totals[static_cast<std::size_t>(e)];
            const double time = net.edge(e).latency.value(x);
            const double slope = net.edge(e).latency.derivative(x);
            const double induced = flows.flow(k, e) * gk.vot * slope;
            for (std::size_t g = 0; g < G; ++g) {
                const double direct = static_cast<int>(g) == k
                                          ? gk.vot * time + gk.toll_scale * net.edge(e).toll
                                          : 0.0;
                margins[g][static_cast<std::size_t>(e)] = -(direct + induced) / nk;
            }
        }
        return margins;
    }

    // Per-group scaling of the utilitarian terms.
    //   CNC:           1 / C_h (the scaled subgradient; zero-cost groups fall
    //                  back to utilitarian scaling with a warning)
    //   CUC(rho = 0):  the group weight (1 by default)
    //   CUC(0<rho<inf): w_h * U_h^(-rho), the exact gradient of the Atkinson
    //                  objective; surpluses are clamped away from zero so the
    //                  field stays finite at infeasible iterates.
    const bool cnc = spec.cls == Comparability::CNC;
    std::vector<double> scale(G, 1.0);
    for (std::size_t h = 0; h < G; ++h) {
        if (cnc) {
            if (evals[h].total_cost > 0.0) {
                scale[h] = 1.0 / evals[h].total_cost;
            } else if (evals[h].participating && warnings) {
                warnings->push_back("group '" + groups[h].id +
                                    "' has zero cost; its Nash margin falls back to utilitarian scaling");
            }
        } else {
            const double n = evals[h].trips;
            const double w = spec.demand_weighted || n <= 0.0 ? spec.base_weight(static_cast<int>(h))
                                                              : spec.base_weight(static_cast<int>(h)) / n;
            if (spec.rho == 0.0) {
                scale[h] = w;
            } else {
                const double u = std::max(evals[h].utility, 1e-12);
                scale[h] = w * std::exp(-spec.rho * std::log(u));
            }
        }
    }

    for (int e = 0; e < E; ++e) {
        const auto ctx = detail::edge_context(net, groups, flows, totals, e);
        double coupling = 0.0;
        for (std::size_t h = 0; h < G; ++h)
            coupling += flows.flow(static_cast<int>(h), e) * groups[h].vot * scale[h];
        for (std::size_t g = 0; g < G; ++g) {
            const double direct = groups[g].vot * ctx.time + groups[g].toll_scale * net.edge(e).toll;
            margins[g][static_cast<std::size_t>(e)] = -(direct * scale[g] + ctx.slope * coupling);
        }
    }
    return margins;
}

}  // namespace ipoa
