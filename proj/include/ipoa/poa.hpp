#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipoa/equilibrium.hpp"
#include "ipoa/network.hpp"
#include "ipoa/social_optimum.hpp"
#include "ipoa/welfare.hpp"

namespace ipoa {

/// Classic cost-ratio Price of Anarchy: equilibrium system cost over optimal
/// system cost. Sensitive to common offsets, which is what the invariant
/// variant repairs.
inline double standard_poa(double cost_ne, double cost_opt) {
    if (!(cost_opt > 0.0))
        throw std::domain_error("standard_poa: optimal cost must be > 0 (ratio undefined)");
    return cost_ne / cost_opt;
}

struct InvariantPoA {
    double value = 0.0;
    /// CNC only: the plain product ratio (group demands cancel), emitted
    /// alongside the default per-capita geometric-mean ratio.
    std::optional<double> plain_product_value;
};

namespace detail {

/// Weighted power mean with exponent p over positive values, in the log
/// domain so extreme p stays finite. p = 0 is the geometric mean.
inline double weighted_power_mean(std::span<const double> values, std::span<const double> weights,
                                  double p) {
    double weight_sum = 0.0;
    for (double w : weights) weight_sum += w;
    if (p == 0.0) {
        double acc = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            acc += weights[i] * std::log(values[i]);
        return std::exp(acc / weight_sum);
    }
    // log-sum-exp of p * log(value), shifted for stability
    double shift = -std::numeric_limits<double>::infinity();
    for (double v : values) shift = std::max(shift, p * std::log(v));
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        acc += weights[i] * std::exp(p * std::log(values[i]) - shift);
    return std::exp((std::log(acc / weight_sum) + shift) / p);
}

}  // namespace detail

/// Invariant Price of Anarchy: ratio of optimal to equilibrium welfare on the
/// surplus scale, expressed per class so the value is immune to the
/// transformations that class declares meaningless.
///
///   CUC(0):        sum n_i U*_i / sum n_i U^NE_i
///   CNC:           per-capita geometric-mean ratio
///                  exp(sum n_i (log U*_i - log U^NE_i) / sum n_i)
///   CUC(infinity): min_i U*_i / min_i U^NE_i
///   CUC(rho):      ratio of weighted power means with exponent 1 - rho (the
///                  equally-distributed-equivalent surplus), which agrees
///                  with the three cases above at rho = 0, 1, infinity, stays
///                  >= 1 whenever the optimum dominates, and is invariant to
///                  a common rescaling for every rho.
inline InvariantPoA invariant_poa(const WelfareSpec& spec, std::span<const double> u_star,
                                  std::span<const double> u_ne, std::span<const double> trips) {
    if (u_star.size() != u_ne.size() || u_star.size() != trips.size())
        throw std::invalid_argument("invariant_poa: mismatched group vectors");

    std::vector<double> star, ne, weight;
    for (std::size_t g = 0; g < u_star.size(); ++g) {
        if (!(trips[g] > 0.0)) continue;  // empty groups are excluded
        star.push_back(u_star[g]);
        ne.push_back(u_ne[g]);
        weight.push_back(spec.demand_weighted ? spec.base_weight(static_cast<int>(g)) * trips[g]
                                              : spec.base_weight(static_cast<int>(g)));
    }
    if (star.empty()) throw std::domain_error("invariant_poa: no participating groups");

    const bool needs_positive =
        spec.cls == Comparability::CNC || spec.rho > 0.0 || std::isinf(spec.rho);
    for (std::size_t i = 0; i < star.size(); ++i) {
        if (needs_positive && (!(star[i] > 0.0) || !(ne[i] > 0.0)))
            throw std::domain_error("invariant_poa (" + spec.name() +
                                    "): non-positive utility for a participating group");
    }

    InvariantPoA out;
    if (spec.cls == Comparability::CNC) {
        out.value = detail::weighted_power_mean(star, weight, 0.0) /
                    detail::weighted_power_mean(ne, weight, 0.0);
        double plain = 1.0;
        for (std::size_t i = 0; i < star.size(); ++i) plain *= star[i] / ne[i];
        out.plain_product_value = plain;
        return out;
    }
    if (spec.is_maxmin()) {
        out.value = *std::min_element(star.begin(), star.end()) /
                    *std::min_element(ne.begin(), ne.end());
        return out;
    }
    if (spec.rho == 0.0) {
        double top = 0.0, bottom = 0.0;
        for (std::size_t i = 0; i < star.size(); ++i) {
            top += weight[i] * star[i];
            bottom += weight[i] * ne[i];
        }
        if (!(bottom > 0.0))
            throw std::domain_error("invariant_poa (cuc0): equilibrium welfare must be > 0");
        out.value = top / bottom;
        return out;
    }
    out.value = detail::weighted_power_mean(star, weight, 1.0 - spec.rho) /
                detail::weighted_power_mean(ne, weight, 1.0 - spec.rho);
    return out;
}

/// One welfare spec's slice of a PoA evaluation.
struct PoAEntry {
    std::string spec_name;
    bool ok = false;
    std::string error;
    double poa = 0.0;
    std::optional<double> poa_alt;  // CNC plain product ratio
    double welfare_opt = 0.0;
    double welfare_ne = 0.0;
    std::vector<double> u_star;  // per group, 0 for empty groups
    int so_iterations = 0;
    double so_relative_gap = 0.0;
};

struct PoAReport {
    std::vector<PoAEntry> entries;
    std::vector<double> u_ne;  // per group at equilibrium
    std::vector<double> trips;
    double total_cost_ne = 0.0;
    double total_cost_cuc0_opt = 0.0;  // set when a cuc0 entry is present
    std::optional<double> standard_poa_value;
    double ue_beckmann = 0.0;
    double ue_relative_gap = 0.0;
};

/// Solves the equilibrium once and one social optimum per welfare spec
/// (equilibria do not depend on the welfare assumption; optima do).
inline PoAReport compute_poa_report(const Instance& instance,
                                    const std::vector<WelfareSpec>& specs,
                                    const FWConfig& config = {}) {
    instance.validate();
    const Network& net = instance.network;
    const auto& groups = instance.groups;
    const auto& demands = instance.demands;

    PoAReport report;
    const UEResult ue = solve_user_equilibrium(net, groups, demands, config);
    require_positive_utilities(groups, ue.outcomes);
    report.ue_beckmann = ue.beckmann_value;
    report.ue_relative_gap = ue.relative_gap;
    for (const auto& ev : ue.outcomes) {
        report.u_ne.push_back(ev.participating ? ev.utility : 0.0);
        report.trips.push_back(ev.trips);
        report.total_cost_ne += ev.total_cost;
    }

    for (const WelfareSpec& spec : specs) {
        PoAEntry entry;
        entry.spec_name = spec.name();
        try {
            const SOResult so =
                solve_social_optimum(net, groups, demands, spec, config, &ue.flows);
            require_positive_utilities(groups, so.outcomes);
            entry.welfare_opt = so.welfare;
            entry.so_iterations = so.iterations;
            entry.so_relative_gap = so.relative_gap;
            double total_cost_opt = 0.0;
            for (const auto& ev : so.outcomes) {
                entry.u_star.push_back(ev.participating ? ev.utility : 0.0);
                total_cost_opt += ev.total_cost;
            }
            const SurplusProfile ne_profile = SurplusProfile::from_evaluations(ue.outcomes);
            entry.welfare_ne = welfare_value(spec, ne_profile);
            const InvariantPoA ipoa = invariant_poa(spec, entry.u_star, report.u_ne, report.trips);
            entry.poa = ipoa.value;
            entry.poa_alt = ipoa.plain_product_value;
            entry.ok = true;
            if (spec.cls == Comparability::CUC && spec.rho == 0.0) {
                report.total_cost_cuc0_opt = total_cost_opt;
                if (total_cost_opt > 0.0)
                    report.standard_poa_value = standard_poa(report.total_cost_ne, total_cost_opt);
            }
        } catch (const std::exception& ex) {
            entry.ok = false;
            entry.error = ex.what();
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

/// Toll-sweep experiment: a grid of per-distance toll rates applied to a set
/// of edges (all edges by default).
struct SweepSpec {
    double rate_min = 0.0;
    double rate_max = 0.0;
    int steps = 1;
    std::vector<int> edges;  // empty = every edge

    std::vector<double> rates() const {
        if (steps < 1) throw std::invalid_argument("sweep: steps must be >= 1");
        if (!(rate_min >= 0.0) || !(rate_max >= rate_min))
            throw std::invalid_argument("sweep: need 0 <= rate_min <= rate_max");
        std::vector<double> out;
        for (int i = 0; i < steps; ++i)
            out.push_back(steps == 1 ? rate_min
                                     : rate_min + (rate_max - rate_min) * i / (steps - 1.0));
        return out;
    }
};

struct SweepRow {
    double rate = 0.0;
    std::string spec_name;
    bool ok = false;
    std::string error;
    double poa = 0.0;
    std::optional<double> poa_alt;
    double welfare_opt = 0.0;
    double welfare_ne = 0.0;
    double ue_relative_gap = 0.0;
    double so_relative_gap = 0.0;
    int so_iterations = 0;
    std::vector<double> u_star, u_ne;
    double wall_seconds = 0.0;  // human-facing only; never serialized
};

inline Instance with_toll_rate(const Instance& base, double rate,
                               const std::vector<int>& edge_subset) {
    Instance tolled = base;
    if (edge_subset.empty()) {
        for (int e = 0; e < tolled.network.num_edges(); ++e)
            tolled.network.edge_mut(e).toll = rate * tolled.network.edge(e).length;
    } else {
        for (int e : edge_subset)
            tolled.network.edge_mut(e).toll = rate * tolled.network.edge(e).length;
    }
    return tolled;
}

/// Runs UE + one SO per spec for every rate on the grid. Per-point failures
/// are recorded in their rows and the sweep continues. Rows are ordered by
/// (rate, spec) regardless of `threads`.
inline std::vector<SweepRow> toll_sweep(const Instance& base,
                                        const std::vector<WelfareSpec>& specs,
                                        const SweepSpec& sweep, const FWConfig& config = {},
                                        int threads = 1) {
    const std::vector<double> rates = sweep.rates();

    auto eval_point = [&](double rate) {
        std::vector<SweepRow> rows;
        const auto start = std::chrono::steady_clock::now();
        try {
            const Instance tolled = with_toll_rate(base, rate, sweep.edges);
            const PoAReport report = compute_poa_report(tolled, specs, config);
            for (const PoAEntry& entry : report.entries) {
                SweepRow row;
                row.rate = rate;
                row.spec_name = entry.spec_name;
                row.ok = entry.ok;
                row.error = entry.error;
                row.poa = entry.poa;
                row.poa_alt = entry.poa_alt;
                row.welfare_opt = entry.welfare_opt;
                row.welfare_ne = entry.welfare_ne;
                row.ue_relative_gap = report.ue_relative_gap;
                row.so_relative_gap = entry.so_relative_gap;
                row.so_iterations = entry.so_iterations;
                row.u_star = entry.u_star;
                row.u_ne = report.u_ne;
                rows.push_back(std::move(row));
            }
        } catch (const std::exception& ex) {
            for (const WelfareSpec& spec : specs) {
                SweepRow row;
                row.rate = rate;
                row.spec_name = spec.name();
                row.ok = false;
                row.error = ex.what();
                rows.push_back(std::move(row));
            }
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (auto& row : rows) row.wall_seconds = seconds;
        return rows;
    };

    std::vector<std::vector<SweepRow>> per_rate(rates.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < rates.size(); ++i) per_rate[i] = eval_point(rates[i]);
    } else {
        // Waves of at most `threads` concurrent points; each point owns its state.
        for (std::size_t base_i = 0; base_i < rates.size();
             base_i += static_cast<std::size_t>(threads)) {
            std::vector<std::future<std::vector<SweepRow>>> futures;
            const std::size_t end =
                std::min(rates.size(), base_i + static_cast<std::size_t>(threads));
            for (std::size_t i = base_i; i < end; ++i)
                futures.push_back(std::async(std::launch::async, eval_point, rates[i]));
            for (std::size_t i = base_i; i < end; ++i)
                per_rate[i] = futures[i - base_i].get();
        }
    }

    std::vector<SweepRow> rows;
    for (auto& batch : per_rate)
        for (auto& row : batch) rows.push_back(std::move(row));
    return rows;
}

}  // namespace ipoa
