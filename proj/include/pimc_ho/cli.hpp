#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pimc_ho/analysis.hpp"
#include "pimc_ho/config.hpp"
#include "pimc_ho/energies.hpp"
#include "pimc_ho/errors.hpp"
#include "pimc_ho/grid_oracle.hpp"
#include "pimc_ho/optimize.hpp"
#include "pimc_ho/reference_data.hpp"

namespace pimc_ho::cli {

enum class Backend { plain, extended };

inline Backend backend_from_env() {
    const char* v = std::getenv("PIMC_HO_PRECISION");
    if (!v) return Backend::plain;
    std::string s(v);
    if (s == "double" || s.empty()) return Backend::plain;
    if (s == "extended") return Backend::extended;
    throw ConfigError("PIMC_HO_PRECISION must be 'double' or 'extended', got '" + s + "'");
}

enum class OutputFormat { table, csv };

struct RunConfig {
    std::string family;      // family name, or empty when config_path is set
    std::string config_path; // propagator config file
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double t0 = std::numeric_limits<double>::quiet_NaN();
    double t1 = std::numeric_limits<double>::quiet_NaN();
    double a1 = std::numeric_limits<double>::quiet_NaN();

    double tau = std::numeric_limits<double>::quiet_NaN();
    double eps = std::numeric_limits<double>::quiet_NaN();
    std::string n_list = "1";
    std::string kind = "thermo"; // thermo | hamiltonian | both
    OutputFormat format = OutputFormat::table;
    std::string out_path; // empty: stdout

    std::string target; // optimize subcommand
    double grid_half_width = 0.0; // 0: module default
    int grid_points = 0;
    Backend backend = Backend::plain;
};

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

inline std::string fixed8(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.8f", v);
    return buf;
}

inline std::string sig10(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// "2,4,8", "2..7", "2..1024:g2" (geometric), "2..20:+3" (arithmetic)
inline std::vector<int> parse_n_list(const std::string& spec) {
    std::vector<int> out;
    auto parse_int = [&](const std::string& s) {
        try {
            std::size_t pos = 0;
            long v = std::stol(s, &pos);
            if (pos != s.size() || v < 1) throw std::invalid_argument("bad");
            return static_cast<int>(v);
        } catch (const std::exception&) {
            throw ConfigError("bad N value '" + s + "' in '" + spec + "'");
        }
    };
    std::size_t dots = spec.find("..");
    if (dots != std::string::npos) {
        std::string head = spec.substr(0, dots), rest = spec.substr(dots + 2);
        std::string step;
        std::size_t colon = rest.find(':');
        if (colon != std::string::npos) {
            step = rest.substr(colon + 1);
            rest = rest.substr(0, colon);
        }
        int lo = parse_int(head), hi = parse_int(rest);
        if (hi < lo) throw ConfigError("empty N range '" + spec + "'");
        if (step.empty() || step[0] == '+') {
            int inc = step.empty() ? 1 : parse_int(step.substr(1));
            for (int n = lo; n <= hi; n += inc) out.push_back(n);
        } else if (step[0] == 'g') {
            int factor = parse_int(step.substr(1));
            if (factor < 2) throw ConfigError("geometric step must be >= 2 in '" + spec + "'");
            for (long n = lo; n <= hi; n *= factor) out.push_back(static_cast<int>(n));
        } else {
            throw ConfigError("bad N range step '" + step + "'");
        }
        return out;
    }
    std::size_t pos = 0;
    while (pos < spec.size()) {
        std::size_t comma = spec.find(',', pos);
        std::string tok = spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!tok.empty()) out.push_back(parse_int(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("empty N list '" + spec + "'");
    return out;
}

inline ContractedPropagator resolve_propagator(const RunConfig& cfg) {
    if (!cfg.config_path.empty()) return load_propagator_config(cfg.config_path);
    if (cfg.family.empty()) throw ConfigError("no propagator: pass --family or --config");
    std::map<std::string, double> params;
    if (!std::isnan(cfg.alpha)) params["alpha"] = cfg.alpha;
    if (!std::isnan(cfg.t0)) params["t0"] = cfg.t0;
    if (!std::isnan(cfg.t1)) params["t1"] = cfg.t1;
    if (!std::isnan(cfg.a1)) params["a1"] = cfg.a1;
    try {
        return make_family_propagator(cfg.family, params);
    } catch (const ParameterOutOfRange& e) {
        throw ConfigError(e.what());
    }
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open output file '" + path + "'");
    return f;
}

namespace detail {

inline void emit_row(std::ostream& os, OutputFormat fmt, const std::vector<std::string>& cells,
                     const std::vector<int>& widths) {
    if (fmt == OutputFormat::csv) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            os << cells[i] << (i + 1 < cells.size() ? "," : "");
        os << "\n";
        return;
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        os << std::setw(widths[i]) << cells[i];
        if (i + 1 < cells.size()) os << "  ";
    }
    os << "\n";
}

} // namespace detail

// ---------------------------------------------------------------------------
// table1: PA and TI thermodynamic energies at tau = 5 vs the published
// PIMC values of Sakkos et al.
// ---------------------------------------------------------------------------

inline void cmd_table1(std::ostream& os, OutputFormat fmt = OutputFormat::table) {
    const double tau = 5.0;
    ContractedPropagator pa = make_pa(), ti = make_ti();
    const std::vector<int> widths = {6, 12, 12, 12, 12};
    detail::emit_row(os, fmt, {"N", "Sakkos-PA", "PA", "Sakkos-TI", "TI"}, widths);
    for (int n = 2; n <= 1024; n *= 2) {
        std::string spa = "", sti = "";
        for (std::size_t i = 0; i < reference::sakkos_pa_ti_rows; ++i) {
            if (reference::sakkos_pa_ti[i].n == n) {
                char buf[16];
                std::snprintf(buf, sizeof buf, "%.5f", reference::sakkos_pa_ti[i].pa);
                spa = buf;
                if (reference::sakkos_pa_ti[i].ti > 0.0) {
                    std::snprintf(buf, sizeof buf, "%.5f", reference::sakkos_pa_ti[i].ti);
                    sti = buf;
                }
            }
        }
        detail::emit_row(os, fmt,
                         {std::to_string(n), spa, fixed8(evaluate_tau(pa, n, tau).e_thermo), sti,
                          fixed8(evaluate_tau(ti, n, tau).e_thermo)},
                         widths);
    }
    detail::emit_row(os, fmt, {"inf", "", fixed8(exact_energy(tau)), "", fixed8(exact_energy(tau))},
                     widths);
}

// ---------------------------------------------------------------------------
// table2: CA1/CA2 thermodynamic energies vs Sakkos et al., BD' thermodynamic
// and BD* Hamiltonian energies, tau = 5, N = 2..7.
// ---------------------------------------------------------------------------

inline void cmd_table2(std::ostream& os, OutputFormat fmt = OutputFormat::table) {
    const double tau = 5.0;
    ContractedPropagator ca1 = make_ca1(), ca2 = make_ca2();
    ContractedPropagator bdp = make_bd_prime(), bds = make_bd_star();
    const std::vector<int> widths = {4, 12, 12, 12, 12, 12, 12};
    detail::emit_row(os, fmt, {"N", "Sakkos-CA1", "CA1", "Sakkos-CA2", "CA2", "BD'", "HBD*"},
                     widths);
    for (int n = 2; n <= 7; ++n) {
        std::string sca1 = "", sca2 = "";
        for (std::size_t i = 0; i < reference::sakkos_ca_rows; ++i) {
            if (reference::sakkos_ca[i].n == n) {
                char buf[16];
                std::snprintf(buf, sizeof buf, "%.5f", reference::sakkos_ca[i].ca1);
                sca1 = buf;
                if (reference::sakkos_ca[i].ca2 > 0.0) {
                    std::snprintf(buf, sizeof buf, "%.5f", reference::sakkos_ca[i].ca2);
                    sca2 = buf;
                }
            }
        }
        detail::emit_row(os, fmt,
                         {std::to_string(n), sca1, fixed8(evaluate_tau(ca1, n, tau).e_thermo), sca2,
                          fixed8(evaluate_tau(ca2, n, tau).e_thermo),
                          fixed8(evaluate_tau(bdp, n, tau).e_thermo),
                          fixed8(evaluate_tau(bds, n, tau).e_hamiltonian)},
                         widths);
    }
    detail::emit_row(os, fmt, {"inf", "", fixed8(exact_energy(tau)), "", "", "", ""}, widths);
}

// ---------------------------------------------------------------------------
// energies: one row per N at fixed tau or eps
// ---------------------------------------------------------------------------

inline void cmd_energies(const RunConfig& cfg, std::ostream& os) {
    bool have_tau = !std::isnan(cfg.tau), have_eps = !std::isnan(cfg.eps);
    if (have_tau == have_eps)
        throw ConfigError("energies: specify exactly one of --tau and --eps");
    if (cfg.kind != "thermo" && cfg.kind != "hamiltonian" && cfg.kind != "both")
        throw ConfigError("energies: --kind must be thermo, hamiltonian or both");
    ContractedPropagator prop = resolve_propagator(cfg);
    std::vector<int> ns = parse_n_list(cfg.n_list);

    std::vector<std::string> header = {"label", "N", "tau", "eps"};
    if (cfg.kind == "thermo" || cfg.kind == "both") header.push_back("E_T");
    if (cfg.kind == "hamiltonian" || cfg.kind == "both") header.push_back("E_H");
    header.push_back("Z");
    const std::vector<int> widths = {10, 6, 12, 12, 14, 14, 14};
    detail::emit_row(os, cfg.format, header, widths);
    for (int n : ns) {
        EnergyResult r = have_tau ? evaluate_tau(prop, n, cfg.tau) : evaluate_eps(prop, n, cfg.eps);
        std::vector<std::string> row = {r.label, std::to_string(n), sig10(r.tau), sig10(r.eps)};
        if (cfg.kind == "thermo" || cfg.kind == "both") row.push_back(sig10(r.e_thermo));
        if (cfg.kind == "hamiltonian" || cfg.kind == "both") row.push_back(sig10(r.e_hamiltonian));
        row.push_back(sig10(r.z));
        detail::emit_row(os, cfg.format, row, widths);
    }
}

// ---------------------------------------------------------------------------
// figures: CSV data behind each figure panel
// ---------------------------------------------------------------------------

inline std::vector<std::string> cmd_figures(const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;

    auto energy_panel = [&](const std::string& name, const ContractedPropagator& prop,
                            const std::vector<int>& ns) {
        std::string path = (fs::path(out_dir) / ("fig_" + name + ".csv")).string();
        std::ofstream f = open_out(path);
        f << "tau,estimator,energy\n";
        for (int n : ns) {
            for (int i = 1; i <= 100; ++i) {
                double tau = 0.1 * i;
                EnergyResult r = evaluate_tau(prop, n, tau);
                f << sig10(tau) << ",T" << n << "," << sig10(r.e_thermo) << "\n";
                f << sig10(tau) << ",H" << n << "," << sig10(r.e_hamiltonian) << "\n";
            }
        }
        written.push_back(path);
    };

    energy_panel("pa", make_pa(), {2, 4, 8, 16});
    energy_panel("ti", make_ti(), {2, 4, 8, 16});
    energy_panel("4a", make_4a(0.0), {2, 3, 4});
    energy_panel("4a-prime", make_4a_prime(), {2, 3, 4});
    energy_panel("bd", make_bda(bda_t1_min(), 0.0), {2, 3, 4});
    energy_panel("bd-prime", make_bd_prime(), {2, 3, 4});
    energy_panel("bd-star", make_bd_star(), {2, 3, 4});

    { // all propagators at N = 3
        std::string path = (fs::path(out_dir) / "fig_n3.csv").string();
        std::ofstream f = open_out(path);
        f << "tau,propagator,estimator,energy\n";
        std::vector<ContractedPropagator> props = {make_pa(),       make_ti(),  make_4a(0.0),
                                                   make_4a_prime(), make_ca1(), make_bd_prime(),
                                                   make_bd_star()};
        for (const ContractedPropagator& prop : props)
            for (int i = 1; i <= 100; ++i) {
                double tau = 0.1 * i;
                EnergyResult r = evaluate_tau(prop, 3, tau);
                f << sig10(tau) << "," << prop.label() << ",T," << sig10(r.e_thermo) << "\n";
                f << sig10(tau) << "," << prop.label() << ",H," << sig10(r.e_hamiltonian) << "\n";
            }
        written.push_back(path);
    }

    { // convergence of every estimator at tau = 10
        std::string path = (fs::path(out_dir) / "fig_convergence.csv").string();
        std::ofstream f = open_out(path);
        f << "eps,propagator,estimator,rel_error\n";
        const double tau = 10.0, e_ref = exact_energy(tau);
        std::vector<ContractedPropagator> props = {make_pa(),       make_ti(),  make_4a(0.0),
                                                   make_4a_prime(), make_bd_prime(), make_bd_star()};
        for (const ContractedPropagator& prop : props)
            for (int i = 0; i < 64; ++i) {
                double eps = 2.5 * std::pow(10.0, -3.0 * i / 63.0);
                for (Estimator est : {Estimator::thermo, Estimator::hamiltonian}) {
                    PortalQuantities q = portal(prop, eps);
                    double e = (est == Estimator::thermo ? q.rho_t : q.rho_h) * 0.5 /
                               std::tanh(0.5 * (tau / eps) * q.u);
                    f << sig10(eps) << "," << prop.label() << ","
                      << (est == Estimator::thermo ? "T" : "H") << ","
                      << sig10(std::abs(e - e_ref) / e_ref) << "\n";
                }
            }
        written.push_back(path);
    }
    return written;
}

// ---------------------------------------------------------------------------
// convergence: error sweep plus fitted order at fixed tau
// ---------------------------------------------------------------------------

inline void cmd_convergence(const RunConfig& cfg, std::ostream& os) {
    if (std::isnan(cfg.tau)) throw ConfigError("convergence: --tau is required");
    if (cfg.kind != "thermo" && cfg.kind != "hamiltonian")
        throw ConfigError("convergence: --kind must be thermo or hamiltonian");
    ContractedPropagator prop = resolve_propagator(cfg);
    Estimator est = cfg.kind == "thermo" ? Estimator::thermo : Estimator::hamiltonian;

    ErrorProfile profile = cfg.backend == Backend::extended
                               ? extract_error_profile_extended(prop)
                               : extract_error_profile(prop);
    FitOptions fit_opt;
    fit_opt.extended = cfg.backend == Backend::extended;
    OrderFit fit = fit_order(prop, est, cfg.tau, fit_opt);

    const double e_ref = exact_energy(cfg.tau);
    os << "eps,abs_error\n";
    for (int i = 0; i < 60; ++i) {
        // continuous sweep at fixed tau; N = tau/eps enters only through N*u
        double eps = 3.0 * std::pow(10.0, -2.5 * i / 59.0);
        PortalQuantities q = portal(prop, eps);
        double e = (est == Estimator::thermo ? q.rho_t : q.rho_h) * 0.5 /
                   std::tanh(0.5 * (cfg.tau / eps) * q.u);
        os << sig10(eps) << "," << sig10(std::abs(e - e_ref)) << "\n";
    }
    os << "# propagator: " << prop.label() << "\n";
    os << "# nominal order: " << fit.nominal_order
       << " (thermo " << profile.thermo_order << ", hamiltonian " << profile.hamiltonian_order
       << ")\n";
    os << "# fitted slope: " << sig10(fit.slope) << " over eps in [" << sig10(fit.eps_lo) << ", "
       << sig10(fit.eps_hi) << "], " << fit.points << " points, rms " << sig10(fit.rms_residual)
       << "\n";
}

// ---------------------------------------------------------------------------
// optimize: the named parameter solves
// ---------------------------------------------------------------------------

inline void cmd_optimize(const RunConfig& cfg, std::ostream& os) {
    auto show = [&](const char* name, double v) {
        if (!std::isnan(v)) os << "  " << name << " = " << sig10(v) << "\n";
    };
    OptimizationResult r;
    std::string what;
    if (cfg.family == "pa_ti" || cfg.family == "pa-ti" || cfg.family == "pa" || cfg.family == "ti") {
        if (cfg.target != "fourth") throw ConfigError("pa_ti supports --target fourth");
        r = solve_pa_ti_fourth();
        what = "pa_ti: delta4 = 1";
    } else if (cfg.family == "4a") {
        if (cfg.target != "sixth") throw ConfigError("4a supports --target sixth");
        r = solve_four_a_sixth();
        what = "4a: delta6 = 1";
    } else if (cfg.family == "bda") {
        if (cfg.target == "max-delta8") {
            r = solve_bda_max_delta8();
            what = "bda: delta6 = 1, delta8 maximized";
        } else if (cfg.target == "twelfth") {
            r = solve_bda_twelfth();
            what = "bda: delta6 = 1 and delta5' = 1";
        } else {
            throw ConfigError("bda supports --target max-delta8 or twelfth");
        }
    } else if (cfg.family == "acb") {
        if (cfg.target == "twelfth") {
            r = solve_acb_twelfth();
            what = "acb: delta6 = 1 and delta5' = 1";
        } else if (cfg.target == "locus") {
            std::vector<double> a1s;
            for (int i = 0; i <= 10; ++i) a1s.push_back(0.05 * i);
            os << "a1,t0\n";
            for (const CaLocusPoint& p : ca_sixth_order_locus(a1s))
                os << sig10(p.a1) << "," << sig10(p.t0) << "\n";
            return;
        } else {
            throw ConfigError("acb supports --target twelfth or locus");
        }
    } else {
        throw ConfigError("optimize: unknown family '" + cfg.family + "'");
    }

    os << "target: " << what << "\n";
    if (r.status == OptimizationResult::Status::no_real_solution) {
        os << "status: no real solution (scan found no sign change)\n";
        return;
    }
    os << "status: solved\n";
    show("alpha", r.alpha);
    show("t0", r.t0);
    show("t1", r.t1);
    show("a1", r.a1);
    show("delta4", r.delta4);
    show("delta5'", r.delta5p);
    show("delta6", r.delta6);
    show("delta7'", r.delta7p);
    show("delta8", r.delta8);
    show("D", r.d_coeff);
    show("D^2/2", r.half_d_squared);
    if (r.profile) {
        os << "  thermodynamic order " << r.profile->thermo_order << ", hamiltonian order "
           << r.profile->hamiltonian_order << "\n";
    }
}

// ---------------------------------------------------------------------------
// oracle: analytic vs grid side by side
// ---------------------------------------------------------------------------

inline void cmd_oracle(const RunConfig& cfg, std::ostream& os) {
    bool have_tau = !std::isnan(cfg.tau), have_eps = !std::isnan(cfg.eps);
    if (have_tau == have_eps)
        throw ConfigError("oracle: specify exactly one of --tau and --eps");
    ContractedPropagator prop = resolve_propagator(cfg);
    GridSpec grid;
    if (cfg.grid_half_width > 0.0) grid.half_width = cfg.grid_half_width;
    if (cfg.grid_points > 0) grid.points = cfg.grid_points;

    for (int n : parse_n_list(cfg.n_list)) {
        double eps = have_tau ? cfg.tau / n : cfg.eps;
        EnergyResult a = evaluate_eps(prop, n, eps);
        OracleEnergies o = oracle_energies(prop, n, eps, grid);
        os << prop.label() << "  N=" << n << "  eps=" << sig10(eps) << "\n";
        auto line = [&](const char* q, double av, double ov) {
            os << "  " << std::setw(4) << q << "  analytic " << std::setw(16) << sig10(av)
               << "  oracle " << std::setw(16) << sig10(ov) << "  delta " << sig10(ov - av)
               << "\n";
        };
        line("Z", a.z, o.z);
        line("E_T", a.e_thermo, o.thermo);
        line("E_H", a.e_hamiltonian, o.hamiltonian);
    }
}

} // namespace pimc_ho::cli
