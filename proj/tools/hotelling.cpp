// hotelling: simulate, check, phase and ihat subcommands over a JSON run config.
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hotelling/commands.hpp"

int main(int argc, char** argv) {
    using namespace hotelling;

    CLI::App app{"Horizontal differentiation on manifolds: softmin demand, gradient dynamics, equilibrium checks"};
    app.require_subcommand(1);

    GlobalOptions g;
    std::uint64_t seed = 0;
    std::string out_dir;
    app.add_option("--config", g.config_path, "JSON run config");
    auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
    auto* out_opt = app.add_option("--out", out_dir, "Override the output directory");
    app.add_flag("--quiet", g.quiet, "Do not echo results to stdout");

    auto* sim = app.add_subcommand("simulate", "Run the gradient dynamics; writes trajectory.csv and summary.txt");
    auto* check = app.add_subcommand("check", "Concentrated-equilibrium report; writes report.txt");

    PhaseFlags pf;
    auto* phase = app.add_subcommand("phase", "Concentration fraction over a (beta, N) grid; writes phase.csv");
    phase->add_option("--betas", pf.betas, "beta grid: a,b,c or start:stop:step");
    phase->add_option("--ns", pf.ns, "N grid: a,b,c or start:stop:step");
    phase->add_option("--replicates", pf.replicates, "Seeds per cell")->check(CLI::PositiveNumber);

    IhatFlags ih;
    auto* ihat = app.add_subcommand("ihat", "Monte Carlo estimate of the hypercube integral");
    ihat->add_option("--dimension,-A", ih.dimension, "Hypercube dimension")->check(CLI::PositiveNumber);
    ihat->add_option("--samples", ih.samples, "Monte Carlo samples");

    // Global flags may follow the subcommand name.
    for (auto* sub : {sim, check, phase, ihat}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }
    if (*seed_opt) g.seed = seed;
    if (*out_opt) g.out = out_dir;

    if (*sim) return cmd_simulate(g, std::cout, std::cerr);
    if (*check) return cmd_check(g, std::cout, std::cerr);
    if (*phase) return cmd_phase(g, pf, std::cout, std::cerr);
    return cmd_ihat(g, ih, std::cout, std::cerr);
}
