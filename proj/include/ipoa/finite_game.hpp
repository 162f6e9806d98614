#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipoa/poa.hpp"
#include "ipoa/welfare.hpp"

namespace ipoa {

/// A finite cost-minimization game with reservation costs. Strategy profiles
/// are indexed row-major (the last player's strategy varies fastest); costs
/// are stored per player as a flat vector over profiles.
struct FiniteGame {
    std::string name;
    std::vector<int> strategy_counts;        // |S_i| per player
    std::vector<std::vector<double>> costs;  // [player][profile]
    std::vector<double> c_max;               // reservation cost per player

    int players() const { return static_cast<int>(strategy_counts.size()); }

    long num_profiles() const {
        long n = 1;
        for (int s : strategy_counts) n *= s;
        return n;
    }

    long profile_index(const std::vector<int>& profile) const {
        long idx = 0;
        for (std::size_t i = 0; i < profile.size(); ++i) {
            if (profile[i] < 0 || profile[i] >= strategy_counts[i])
                throw std::out_of_range("profile strategy out of range");
            idx = idx * strategy_counts[i] + profile[i];
        }
        return idx;
    }

    std::vector<int> profile_at(long index) const {
        std::vector<int> profile(strategy_counts.size());
        for (std::size_t i = strategy_counts.size(); i-- > 0;) {
            profile[i] = static_cast<int>(index % strategy_counts[i]);
            index /= strategy_counts[i];
        }
        return profile;
    }

    double cost(int player, const std::vector<int>& profile) const {
        return costs[static_cast<std::size_t>(player)][static_cast<std::size_t>(profile_index(profile))];
    }

    double surplus(int player, long profile) const {
        return c_max[static_cast<std::size_t>(player)] -
               costs[static_cast<std::size_t>(player)][static_cast<std::size_t>(profile)];
    }

    /// Participation: every player's cost must sit strictly below the
    /// reservation cost at every profile.
    void validate() const {
        if (strategy_counts.empty()) throw std::invalid_argument("game: needs at least one player");
        for (int s : strategy_counts)
            if (s < 1) throw std::invalid_argument("game: every player needs a strategy");
        if (costs.size() != strategy_counts.size() || c_max.size() != strategy_counts.size())
            throw std::invalid_argument("game: costs and c_max must cover every player");
        const long profiles = num_profiles();
        for (std::size_t i = 0; i < costs.size(); ++i) {
            if (static_cast<long>(costs[i].size()) != profiles)
                throw std::invalid_argument("game: player " + std::to_string(i) +
                                            " cost table has the wrong size");
            for (double c : costs[i])
                if (!(c < c_max[i]))
                    throw std::invalid_argument(
                        "game: player " + std::to_string(i) +
                        " has a profile at or above the reservation cost (would not participate)");
        }
    }
};

/// Exhaustive pure Nash equilibrium enumeration: a profile survives when no
/// player has a strictly cost-reducing unilateral deviation. An empty result
/// is a valid outcome.
inline std::vector<std::vector<int>> enumerate_pne(const FiniteGame& game) {
    game.validate();
    std::vector<std::vector<int>> equilibria;
    const long profiles = game.num_profiles();
    for (long p = 0; p < profiles; ++p) {
        std::vector<int> profile = game.profile_at(p);
        bool stable = true;
        for (int i = 0; i < game.players() && stable; ++i) {
            const double here = game.costs[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)];
            std::vector<int> deviated = profile;
            for (int s = 0; s < game.strategy_counts[static_cast<std::size_t>(i)]; ++s) {
                if (s == profile[static_cast<std::size_t>(i)]) continue;
                deviated[static_cast<std::size_t>(i)] = s;
                if (game.cost(i, deviated) < here) {
                    stable = false;
                    break;
                }
            }
        }
        if (stable) equilibria.push_back(std::move(profile));
    }
    return equilibria;
}

/// Per-player strictly increasing affine maps applied to costs and
/// reservation costs together, so surpluses transform as a_i * surplus.
struct AffineTransform {
    enum class Class { IndividualAffine, CommonScale, CommonAffine };

    std::vector<double> scale;   // a_i > 0
    std::vector<double> offset;  // b_i
    Class tag = Class::IndividualAffine;

    static AffineTransform identity(int players) {
        AffineTransform t;
        t.scale.assign(static_cast<std::size_t>(players), 1.0);
        t.offset.assign(static_cast<std::size_t>(players), 0.0);
        return t;
    }

    void validate() const {
        if (scale.size() != offset.size())
            throw std::invalid_argument("transform: scale/offset size mismatch");
        for (double a : scale)
            if (!(a > 0.0)) throw std::invalid_argument("transform: scales must be > 0");
        if (tag == Class::CommonScale || tag == Class::CommonAffine)
            for (double a : scale)
                if (a != scale.front())
                    throw std::invalid_argument("transform: common-scale requires equal scales");
        if (tag == Class::CommonAffine)
            for (double b : offset)
                if (b != offset.front())
                    throw std::invalid_argument("transform: common-affine requires equal offsets");
    }
};

/// c'_i = a_i c_i + b_i with c_max transformed alongside; equilibria are
/// untouched and surpluses scale by a_i exactly.
inline FiniteGame apply_transform(const FiniteGame& game, const AffineTransform& t) {
    t.validate();
    if (static_cast<int>(t.scale.size()) != game.players())
        throw std::invalid_argument("apply_transform: one (a, b) pair per player required");
    FiniteGame out = game;
    for (std::size_t i = 0; i < out.costs.size(); ++i) {
        for (double& c : out.costs[i]) c = t.scale[i] * c + t.offset[i];
        out.c_max[i] = t.scale[i] * game.c_max[i] + t.offset[i];
    }
    return out;
}

struct FiniteGamePoA {
    bool defined = false;  // false when the game has no pure equilibrium
    double value = 0.0;
    std::vector<int> optimum;
    std::vector<int> worst_equilibrium;
};

namespace detail {

inline SurplusProfile game_profile(const FiniteGame& game, long profile) {
    SurplusProfile p;
    for (int i = 0; i < game.players(); ++i) {
        p.surplus.push_back(game.surplus(i, profile));
        p.trips.push_back(1.0);
        p.group_index.push_back(i);
    }
    return p;
}

}  // namespace detail

/// Invariant PoA of a finite game: welfare-optimal profile over the worst
/// pure equilibrium, both found by literal enumeration, reported as the
/// class's surplus ratio (so the number matches the traffic-side metric).
inline FiniteGamePoA finite_game_invariant_poa(const FiniteGame& game, const WelfareSpec& spec) {
    game.validate();
    spec.validate(static_cast<std::size_t>(game.players()));
    FiniteGamePoA out;
    const auto equilibria = enumerate_pne(game);
    if (equilibria.empty()) return out;  // undefined-PoA signal

    const long profiles = game.num_profiles();
    long best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (long p = 0; p < profiles; ++p) {
        const double w = welfare_value(spec, detail::game_profile(game, p));
        if (w > best_value) {
            best_value = w;
            best = p;
        }
    }
    long worst_ne = game.profile_index(equilibria.front());
    double worst_value = std::numeric_limits<double>::infinity();
    for (const auto& eq : equilibria) {
        const long p = game.profile_index(eq);
        const double w = welfare_value(spec, detail::game_profile(game, p));
        if (w < worst_value) {
            worst_value = w;
            worst_ne = p;
        }
    }

    const SurplusProfile star = detail::game_profile(game, best);
    const SurplusProfile ne = detail::game_profile(game, worst_ne);
    out.defined = true;
    out.value = invariant_poa(spec, star.surplus, ne.surplus, star.trips).value;
    out.optimum = game.profile_at(best);
    out.worst_equilibrium = game.profile_at(worst_ne);
    return out;
}

struct InvarianceReport {
    double poa_before = 0.0;
    double poa_after = 0.0;
    bool pne_sets_equal = false;
    bool poa_equal = false;          // relative difference within 1e-9
    double relative_violation = 0.0;
};

/// Applies the transform, recomputes equilibria and invariant PoA, and
/// reports whether both survived. Matched class pairs (CNC with
/// individual-affine, CUC with common-scale) must come out equal; mismatched
/// pairs are allowed through on purpose so the violation can be measured.
inline InvarianceReport check_invariance(const FiniteGame& game, const WelfareSpec& spec,
                                         const AffineTransform& transform) {
    const FiniteGame transformed = apply_transform(game, transform);
    const auto pne_before = enumerate_pne(game);
    const auto pne_after = enumerate_pne(transformed);

    InvarianceReport report;
    report.pne_sets_equal = pne_before == pne_after;
    const FiniteGamePoA before = finite_game_invariant_poa(game, spec);
    const FiniteGamePoA after = finite_game_invariant_poa(transformed, spec);
    if (!before.defined || !after.defined)
        throw std::domain_error("check_invariance: game has no pure equilibrium");
    report.poa_before = before.value;
    report.poa_after = after.value;
    report.relative_violation =
        std::abs(after.value - before.value) / std::max(std::abs(before.value), 1e-300);
    report.poa_equal = report.relative_violation <= 1e-9;
    return report;
}

}  // namespace ipoa
