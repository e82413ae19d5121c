// Command-line front end: reproduces the reference tables, runs energy
// sweeps, convergence fits, propagator optimization and grid-oracle checks.

#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "pimc_ho/cli.hpp"

namespace {

using pimc_ho::cli::OutputFormat;
using pimc_ho::cli::RunConfig;

void add_propagator_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--family", cfg.family,
                    "propagator family: pa, ti, pa_ti, 4a, 4a-prime, bda, bd, bd-prime, bd-star, "
                    "acb, ca1, ca2, exact");
    cmd->add_option("--config", cfg.config_path, "propagator config file");
    cmd->add_option("--alpha", cfg.alpha, "family parameter alpha");
    cmd->add_option("--t0", cfg.t0, "family parameter t0");
    cmd->add_option("--t1", cfg.t1, "family parameter t1");
    cmd->add_option("--a1", cfg.a1, "family parameter a1");
}

void add_format_options(CLI::App* cmd, RunConfig& cfg, std::string& format) {
    cmd->add_option("--format", format, "output format: table or csv")
        ->check(CLI::IsMember({"table", "csv"}));
    cmd->add_option("--out", cfg.out_path, "write output to this path instead of stdout");
}

// Writes to --out when given, else stdout.
int with_output(const RunConfig& cfg, const std::function<void(std::ostream&)>& fn) {
    if (cfg.out_path.empty()) {
        fn(std::cout);
    } else {
        std::ofstream f = pimc_ho::cli::open_out(cfg.out_path);
        fn(f);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"analytic discrete path-integral energies of the 1-D harmonic oscillator"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string format = "table";

    CLI::App* table1 = app.add_subcommand("table1", "PA/TI thermodynamic energies at tau=5");
    add_format_options(table1, cfg, format);

    CLI::App* table2 = app.add_subcommand("table2", "CA1/CA2/BD'/BD* energies at tau=5");
    add_format_options(table2, cfg, format);

    CLI::App* energies = app.add_subcommand("energies", "energy sweep over N");
    add_propagator_options(energies, cfg);
    add_format_options(energies, cfg, format);
    energies->add_option("--tau", cfg.tau, "total imaginary time (eps = tau/N)");
    energies->add_option("--eps", cfg.eps, "time step per bead");
    energies->add_option("--n", cfg.n_list, "bead counts: comma list, a..b, a..b:gK, a..b:+K");
    energies->add_option("--kind", cfg.kind, "thermo | hamiltonian | both")
        ->check(CLI::IsMember({"thermo", "hamiltonian", "both"}));

    CLI::App* figures = app.add_subcommand("figures", "emit one CSV per figure panel");
    figures->add_option("--out", cfg.out_path, "output directory (default: figures)");

    CLI::App* convergence = app.add_subcommand("convergence", "error sweep and order fit");
    add_propagator_options(convergence, cfg);
    convergence->add_option("--tau", cfg.tau, "fixed total imaginary time (default 10)");
    convergence->add_option("--kind", cfg.kind, "thermo | hamiltonian")
        ->check(CLI::IsMember({"thermo", "hamiltonian"}));
    convergence->add_option("--out", cfg.out_path, "write output to this path");

    CLI::App* optimize = app.add_subcommand("optimize", "solve for propagator parameters");
    optimize->add_option("--family", cfg.family, "pa_ti, 4a, bda or acb")->required();
    optimize->add_option("--target", cfg.target, "fourth, sixth, max-delta8, twelfth, locus")
        ->required();
    optimize->add_option("--out", cfg.out_path, "write output to this path");

    CLI::App* oracle = app.add_subcommand("oracle", "grid-kernel check of the analytic values");
    add_propagator_options(oracle, cfg);
    oracle->add_option("--tau", cfg.tau, "total imaginary time (eps = tau/N)");
    oracle->add_option("--eps", cfg.eps, "time step per bead");
    oracle->add_option("--n", cfg.n_list, "bead counts");
    oracle->add_option("--grid-L", cfg.grid_half_width, "grid half-width (default 10)");
    oracle->add_option("--grid-M", cfg.grid_points, "grid point count (default 2001)");
    oracle->add_option("--out", cfg.out_path, "write output to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        cfg.backend = pimc_ho::cli::backend_from_env();
        cfg.format = format == "csv" ? OutputFormat::csv : OutputFormat::table;
        if (table1->parsed())
            return with_output(cfg, [&](std::ostream& os) { pimc_ho::cli::cmd_table1(os, cfg.format); });
        if (table2->parsed())
            return with_output(cfg, [&](std::ostream& os) { pimc_ho::cli::cmd_table2(os, cfg.format); });
        if (energies->parsed())
            return with_output(cfg, [&](std::ostream& os) { pimc_ho::cli::cmd_energies(cfg, os); });
        if (figures->parsed()) {
            std::string dir = cfg.out_path.empty() ? "figures" : cfg.out_path;
            for (const std::string& path : pimc_ho::cli::cmd_figures(dir))
                std::cout << path << "\n";
            return 0;
        }
        if (convergence->parsed()) {
            if (std::isnan(cfg.tau)) cfg.tau = 10.0;
            return with_output(cfg, [&](std::ostream& os) { pimc_ho::cli::cmd_convergence(cfg, os); });
        }
        if (optimize->parsed())
            return with_output(cfg, [&](std::ostream& os) { pimc_ho::cli::cmd_optimize(cfg, os); });
        if (oracle->parsed())
            return with_output(cfg, [&](std::ostream& os) { pimc_ho::cli::cmd_oracle(cfg, os); });
    } catch (const pimc_ho::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const pimc_ho::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
