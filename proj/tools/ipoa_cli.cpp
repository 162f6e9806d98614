// Command-line front end: equilibrium/optimum assignment, invariant PoA
// evaluation, toll sweeps, finite-game invariance trials, and the synthetic
// city generator.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ipoa/ipoa.hpp"

namespace {

ipoa::WelfareSpec spec_by_name(const std::string& name) {
    if (name == "cuc0") return ipoa::WelfareSpec::cuc0();
    if (name == "cnc") return ipoa::WelfareSpec::cnc();
    if (name == "maxmin") return ipoa::WelfareSpec::maxmin();
    if (name.rfind("atkinson:", 0) == 0)
        return ipoa::WelfareSpec::atkinson(std::stod(name.substr(9)));
    throw CLI::ValidationError("--welfare", "unknown welfare spec '" + name +
                                                "' (use cuc0|cnc|maxmin|atkinson:<rho>)");
}

std::vector<ipoa::WelfareSpec> specs_by_names(const std::vector<std::string>& names) {
    std::vector<ipoa::WelfareSpec> specs;
    for (const auto& n : names) specs.push_back(spec_by_name(n));
    return specs;
}

int env_threads() {
    const char* raw = std::getenv("IPOA_THREADS");
    if (!raw) return 1;
    const int n = std::atoi(raw);
    return n > 0 ? n : 1;
}

void print_group_table(const std::vector<ipoa::TravelerGroup>& groups,
                       const std::vector<ipoa::GroupEvaluation>& evals) {
    std::printf("  %-12s %10s %14s %14s %12s\n", "group", "trips", "total cost", "per-capita",
                "utility");
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (!evals[g].participating) {
            std::printf("  %-12s %10s (no demand)\n", groups[g].id.c_str(), "-");
            continue;
        }
        std::printf("  %-12s %10.4g %14.6g %14.6g %12.6g\n", groups[g].id.c_str(), evals[g].trips,
                    evals[g].total_cost, evals[g].per_capita_cost, evals[g].utility);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"invariant price-of-anarchy toolkit for multi-class traffic assignment"};
    app.require_subcommand(1);

    double tol = 1e-9;
    int max_iter = 400;
    app.add_option("--tol", tol, "Frank-Wolfe objective-change tolerance")->capture_default_str();
    app.add_option("--max-iter", max_iter, "Frank-Wolfe iteration cap")->capture_default_str();

    auto config = [&]() {
        ipoa::FWConfig cfg;
        cfg.tolerance = tol;
        cfg.max_iterations = max_iter;
        return cfg;
    };

    // --- assign -------------------------------------------------------------
    auto* assign = app.add_subcommand("assign", "solve one assignment problem");
    assign->require_subcommand(1);

    std::string ue_instance_path;
    auto* assign_ue = assign->add_subcommand("ue", "Wardrop user equilibrium");
    assign_ue->add_option("instance", ue_instance_path, "instance JSON file")->required();

    std::string so_instance_path, so_welfare = "cuc0";
    auto* assign_so = assign->add_subcommand("so", "welfare-optimal assignment");
    assign_so->add_option("instance", so_instance_path, "instance JSON file")->required();
    assign_so->add_option("--welfare", so_welfare, "cuc0|cnc|maxmin|atkinson:<rho>")
        ->capture_default_str();

    // --- poa ----------------------------------------------------------------
    std::string poa_instance_path, poa_out;
    std::vector<std::string> poa_welfare = {"cuc0", "cnc", "maxmin"};
    auto* poa_cmd = app.add_subcommand("poa", "invariant price of anarchy at current tolls");
    poa_cmd->add_option("instance", poa_instance_path, "instance JSON file")->required();
    poa_cmd->add_option("--welfare", poa_welfare, "welfare specs to evaluate")
        ->delimiter(',')
        ->capture_default_str();
    poa_cmd->add_option("--out", poa_out, "write rows as CSV");

    // --- sweep ---------------------------------------------------------------
    std::string sweep_instance_path, sweep_out, sweep_plot;
    std::vector<std::string> sweep_welfare = {"cuc0", "cnc", "maxmin"};
    double rate_min = 0.0, rate_max = 0.0;
    int steps = 1;
    auto* sweep_cmd = app.add_subcommand("sweep", "per-distance toll-rate sweep");
    sweep_cmd->add_option("instance", sweep_instance_path, "instance JSON file")->required();
    sweep_cmd->add_option("--rate-min", rate_min, "lowest toll rate (money/length)")->required();
    sweep_cmd->add_option("--rate-max", rate_max, "highest toll rate")->required();
    sweep_cmd->add_option("--steps", steps, "number of grid points")->required();
    sweep_cmd->add_option("--welfare", sweep_welfare, "welfare specs")->delimiter(',')
        ->capture_default_str();
    sweep_cmd->add_option("--out", sweep_out, "CSV output path");
    sweep_cmd->add_option("--plot", sweep_plot, "SVG chart output path");

    // --- invariance ----------------------------------------------------------
    std::string game_path, transform_class = "cnc";
    int trials = 100;
    unsigned long long inv_seed = 1;
    double inv_rho = 0.0;
    auto* inv_cmd = app.add_subcommand(
        "invariance", "random affine-transform invariance trials on a finite game");
    inv_cmd->add_option("game", game_path, "finite game JSON file")->required();
    inv_cmd->add_option("--class", transform_class, "cnc (individual affine) or cuc (common scale)")
        ->capture_default_str();
    inv_cmd->add_option("--trials", trials, "number of random transforms")->capture_default_str();
    inv_cmd->add_option("--rho", inv_rho, "inequality aversion for the cuc class")
        ->capture_default_str();
    inv_cmd->add_option("--seed", inv_seed, "RNG seed")->capture_default_str();

    // --- gen-city ------------------------------------------------------------
    int gen_nodes = 188, gen_edges = 525;
    long gen_trips = 14178;
    unsigned long long gen_seed = 1;
    std::string gen_out = "city.json";
    auto* gen_cmd = app.add_subcommand("gen-city", "generate a synthetic city instance");
    gen_cmd->add_option("--nodes", gen_nodes, "node count")->capture_default_str();
    gen_cmd->add_option("--edges", gen_edges, "edge count")->capture_default_str();
    gen_cmd->add_option("--trips", gen_trips, "total trips")->capture_default_str();
    gen_cmd->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
    gen_cmd->add_option("--out", gen_out, "output path")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*assign_ue) {
            const ipoa::Instance instance = ipoa::parse_instance(ue_instance_path);
            const auto result = ipoa::solve_user_equilibrium(instance.network, instance.groups,
                                                             instance.demands, config());
            std::printf("user equilibrium on '%s'\n", instance.name.c_str());
            std::printf("  beckmann objective %.10g, relative gap %.3g, %s\n",
                        result.beckmann_value, result.relative_gap,
                        result.diagnostics.message.c_str());
            print_group_table(instance.groups, result.outcomes);
        } else if (*assign_so) {
            const ipoa::Instance instance = ipoa::parse_instance(so_instance_path);
            const ipoa::WelfareSpec spec = spec_by_name(so_welfare);
            const auto result = ipoa::solve_social_optimum(instance.network, instance.groups,
                                                           instance.demands, spec, config());
            std::printf("social optimum (%s) on '%s'\n", spec.name().c_str(),
                        instance.name.c_str());
            std::printf("  welfare %.10g, relative gap %.3g, %d iterations (start %d)\n",
                        result.welfare, result.relative_gap, result.iterations, result.best_start);
            print_group_table(instance.groups, result.outcomes);
        } else if (*poa_cmd) {
            const ipoa::Instance instance = ipoa::parse_instance(poa_instance_path);
            const auto specs = specs_by_names(poa_welfare);
            const auto report = ipoa::compute_poa_report(instance, specs, config());
            std::printf("invariant price of anarchy on '%s'\n", instance.name.c_str());
            if (report.standard_poa_value)
                std::printf("  standard (cost-ratio) PoA %.6g\n", *report.standard_poa_value);
            for (const auto& entry : report.entries) {
                if (!entry.ok) {
                    std::printf("  %-14s FAILED: %s\n", entry.spec_name.c_str(),
                                entry.error.c_str());
                    continue;
                }
                std::printf("  %-14s PoA %.6g", entry.spec_name.c_str(), entry.poa);
                if (entry.poa_alt) std::printf(" (plain product form %.6g)", *entry.poa_alt);
                std::printf("\n");
            }
            if (!poa_out.empty()) {
                // Degenerate one-point sweep reuses the CSV schema.
                ipoa::SweepSpec degenerate;
                degenerate.steps = 1;
                std::vector<ipoa::SweepRow> rows;
                for (const auto& entry : report.entries) {
                    ipoa::SweepRow row;
                    row.rate = 0.0;
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
                ipoa::write_sweep_csv(rows, instance.groups, poa_out);
                std::printf("  wrote %s\n", poa_out.c_str());
            }
            for (const auto& entry : report.entries)
                if (!entry.ok) return 1;
        } else if (*sweep_cmd) {
            const ipoa::Instance instance = ipoa::parse_instance(sweep_instance_path);
            const auto specs = specs_by_names(sweep_welfare);
            ipoa::SweepSpec sweep;
            sweep.rate_min = rate_min;
            sweep.rate_max = rate_max;
            sweep.steps = steps;
            const auto rows = ipoa::toll_sweep(instance, specs, sweep, config(), env_threads());
            std::printf("%-12s %-14s %-10s %-12s\n", "rate", "spec", "PoA", "time(s)");
            for (const auto& row : rows) {
                if (row.ok)
                    std::printf("%-12.6g %-14s %-10.6g %-12.3g\n", row.rate,
                                row.spec_name.c_str(), row.poa, row.wall_seconds);
                else
                    std::printf("%-12.6g %-14s FAILED: %s\n", row.rate, row.spec_name.c_str(),
                                row.error.c_str());
            }
            if (!sweep_out.empty()) {
                ipoa::write_sweep_csv(rows, instance.groups, sweep_out);
                std::printf("wrote %s\n", sweep_out.c_str());
            }
            if (!sweep_plot.empty()) {
                ipoa::write_sweep_svg(rows, sweep_plot);
                std::printf("wrote %s\n", sweep_plot.c_str());
            }
        } else if (*inv_cmd) {
            const ipoa::FiniteGame game = ipoa::parse_game(game_path);
            ipoa::WelfareSpec spec;
            ipoa::AffineTransform::Class cls;
            if (transform_class == "cnc") {
                spec = ipoa::WelfareSpec::cnc();
                cls = ipoa::AffineTransform::Class::IndividualAffine;
            } else if (transform_class == "cuc") {
                spec = ipoa::WelfareSpec::atkinson(inv_rho);
                cls = ipoa::AffineTransform::Class::CommonScale;
            } else {
                std::fprintf(stderr, "unknown --class '%s' (use cnc or cuc)\n",
                             transform_class.c_str());
                return 1;
            }
            std::mt19937_64 rng(inv_seed);
            auto uniform = [&](double lo, double hi) {
                return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
            };
            int failures = 0;
            double worst = 0.0;
            for (int t = 0; t < trials; ++t) {
                ipoa::AffineTransform transform;
                transform.tag = cls;
                const double common = uniform(0.1, 10.0);
                for (int i = 0; i < game.players(); ++i) {
                    transform.scale.push_back(
                        cls == ipoa::AffineTransform::Class::CommonScale ? common
                                                                         : uniform(0.1, 10.0));
                    transform.offset.push_back(uniform(-5.0, 5.0));
                }
                const auto report = ipoa::check_invariance(game, spec, transform);
                worst = std::max(worst, report.relative_violation);
                if (!report.pne_sets_equal || !report.poa_equal) ++failures;
            }
            std::printf("%d/%d trials invariant (worst relative deviation %.3g)\n",
                        trials - failures, trials, worst);
            if (failures > 0) return 1;
        } else if (*gen_cmd) {
            const ipoa::Instance instance =
                ipoa::generate_synthetic_city(gen_nodes, gen_edges, gen_trips, gen_seed);
            ipoa::write_instance(instance, gen_out);
            std::printf("wrote %s (%d nodes, %d edges, %zu demand rows)\n", gen_out.c_str(),
                        instance.network.num_nodes(), instance.network.num_edges(),
                        instance.demands.size());
        }
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 0;
}
