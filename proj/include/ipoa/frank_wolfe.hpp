#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ipoa/network.hpp"
#include "ipoa/shortest_path.hpp"

namespace ipoa {

/// Per-edge per-group welfare margins w'_{i,e}: the change in the objective
/// per unit of group-i flow added to edge e. More negative means more costly;
/// valid margin fields are nonpositive.
using MarginField = std::vector<std::vector<double>>;  // [group][edge]

struct FWConfig {
    double tolerance = 1e-9;           // stop when |W(x_next) - W(x)| falls below this
    int max_iterations = 400;
    double line_search_tol = 1e-7;     // golden-section interval width on gamma
    double relative_gap_target = 0.0;  // optional stricter certificate; <= 0 disables
};

struct FWResult {
    FlowState flows;
    std::vector<double> trace;  // objective value of every accepted iterate, initial included
    int iterations = 0;
    double gap = 0.0;           // sum over (group, edge) of (y - x) * margin at the final iterate
    double relative_gap = std::numeric_limits<double>::infinity();
    bool converged = false;
    std::string message;
    std::vector<std::string> warnings;
};

using Objective = std::function<double(const FlowState&)>;
using MarginOracle = std::function<MarginField(const FlowState&)>;

/// Converts margins into nonnegative shortest-path weights (weight = -margin).
/// Margins are expected to be <= 0; a group whose margins stray positive is
/// shifted to zero and the shift is reported so callers can log it.
inline std::vector<std::vector<double>> margins_to_weights(const MarginField& margins,
                                                           std::vector<int>* shifted_groups = nullptr) {
    std::vector<std::vector<double>> weights(margins.size());
    for (std::size_t g = 0; g < margins.size(); ++g) {
        double top = 0.0;
        for (double m : margins[g]) top = std::max(top, m);
        if (top > 1e-12 && shifted_groups) shifted_groups->push_back(static_cast<int>(g));
        const double shift = std::max(top, 0.0);
        weights[g].resize(margins[g].size());
        for (std::size_t e = 0; e < margins[g].size(); ++e)
            weights[g][e] = std::max(shift - margins[g][e], 0.0);
    }
    return weights;
}

/// Golden-section maximization of g over [0, 1]. Non-finite evaluations are
/// treated as -infinity, which collapses the bracket back toward gamma = 0.
/// Returns the best gamma among every point actually evaluated (both
/// endpoints included), so the caller never moves to a worse iterate.
inline double golden_section_max(const std::function<double(double)>& g, double tol = 1e-7) {
    const double invphi = 0.6180339887498949;
    auto eval = [&](double gamma) {
        const double v = g(gamma);
        return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
    };

    double best_gamma = 0.0;
    double best_value = eval(0.0);
    auto consider = [&](double gamma, double value) {
        if (value > best_value) {
            best_value = value;
            best_gamma = gamma;
        }
    };
    consider(1.0, eval(1.0));

    double a = 0.0, b = 1.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = eval(c), fd = eval(d);
    consider(c, fc);
    consider(d, fd);

    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = eval(c);
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = eval(d);
            consider(d, fd);
        }
    }
    return best_gamma;
}

/// Step size maximizing `objective` along the segment from x to y.
inline double line_search(const Objective& objective, const FlowState& x, const FlowState& y,
                          double tol = 1e-7) {
    if (x.max_abs_diff(y) == 0.0) return 0.0;  // degenerate segment
    return golden_section_max(
        [&](double gamma) { return objective(FlowState::combine(x, y, gamma)); }, tol);
}

/// Frank-Wolfe loop: margins -> all-or-nothing auxiliary flow -> line search
/// -> convex-combination update. The objective is maximized. Convergence
/// failure is reported in the result, never thrown.
inline FWResult frank_wolfe(const Network& net, const std::vector<TravelerGroup>& groups,
                            const std::vector<Demand>& demands, const MarginOracle& margin_oracle,
                            const Objective& objective, const FWConfig& config = {},
                            const FlowState* initial = nullptr) {
    if (!(config.tolerance > 0.0)) throw std::invalid_argument("frank_wolfe: tolerance must be > 0");
    if (config.max_iterations < 1)
        throw std::invalid_argument("frank_wolfe: max_iterations must be >= 1");

    FWResult result;
    double total_trips = 0.0;
    for (const Demand& d : demands) total_trips += d.trips;
    if (total_trips == 0.0) {
        result.flows = FlowState::zeros(static_cast<int>(groups.size()), net.num_edges());
        result.trace.push_back(objective(result.flows));
        result.converged = true;
        result.gap = 0.0;
        result.relative_gap = 0.0;
        result.message = "no demand";
        return result;
    }

    auto auxiliary = [&](const FlowState& at, double* gap_out) {
        const MarginField margins = margin_oracle(at);
        std::vector<int> shifted;
        const auto weights = margins_to_weights(margins, &shifted);
        for (int g : shifted)
            result.warnings.push_back("positive margin in group '" +
                                      groups[static_cast<std::size_t>(g)].id +
                                      "' shifted to zero");
        FlowState y = all_or_nothing(net, groups, demands, weights);
        if (gap_out) {
            double gap = 0.0;
            for (std::size_t g = 0; g < margins.size(); ++g)
                for (std::size_t e = 0; e < margins[g].size(); ++e)
                    gap += (y.group_flow[g][e] - at.group_flow[g][e]) * margins[g][e];
            *gap_out = gap;
        }
        return y;
    };

    FlowState x = initial
                      ? *initial
                      : auxiliary(FlowState::zeros(static_cast<int>(groups.size()), net.num_edges()),
                                  nullptr);
    double value = objective(x);
    result.trace.push_back(value);

    bool primary_met = false;
    bool gap_met = config.relative_gap_target <= 0.0;
    for (int t = 0; t < config.max_iterations; ++t) {
        double gap = 0.0;
        const FlowState y = auxiliary(x, &gap);
        result.gap = gap;
        result.relative_gap = std::abs(gap) / std::max(std::abs(value), 1e-12);
        gap_met = config.relative_gap_target <= 0.0 ||
                  result.relative_gap <= config.relative_gap_target;

        const double gamma =
            line_search([&](const FlowState& f) { return objective(f); }, x, y,
                        config.line_search_tol);
        FlowState next = FlowState::combine(x, y, gamma);
        double next_value = objective(next);
        if (!(next_value >= value)) {  // keep the iterate monotone
            next = x;
            next_value = value;
        }
        const double delta = std::abs(next_value - value);
        x = std::move(next);
        value = next_value;
        result.trace.push_back(value);
        result.iterations = t + 1;

        primary_met = delta < config.tolerance;
        if (primary_met && gap_met) {
            result.converged = true;
            break;
        }
    }

    // Final certificate at the accepted iterate.
    double final_gap = 0.0;
    (void)auxiliary(x, &final_gap);
    result.gap = final_gap;
    result.relative_gap = std::abs(final_gap) / std::max(std::abs(value), 1e-12);
    if (config.relative_gap_target > 0.0)
        gap_met = result.relative_gap <= config.relative_gap_target;
    result.converged = primary_met && gap_met;

    result.flows = std::move(x);
    if (result.converged) {
        result.message = "converged";
    } else if (!primary_met) {
        result.message = "objective still improving at max_iterations";
    } else {
        result.message = "non-improving step with relative gap " +
                         std::to_string(result.relative_gap) + " above target";
    }
    return result;
}

}  // namespace ipoa
