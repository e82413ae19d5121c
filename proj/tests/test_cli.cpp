#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pimc_ho/cli.hpp"

using namespace pimc_ho;
using namespace pimc_ho::cli;

TEST_CASE("cli: N list parsing") {
    CHECK(parse_n_list("2,4,8") == std::vector<int>{2, 4, 8});
    CHECK(parse_n_list("2..5") == std::vector<int>{2, 3, 4, 5});
    CHECK(parse_n_list("2..20:+6") == std::vector<int>{2, 8, 14, 20});
    CHECK(parse_n_list("2..1024:g2") ==
          std::vector<int>{2, 4, 8, 16, 32, 64, 128, 256, 512, 1024});
    CHECK_THROWS_AS((void)parse_n_list(""), ConfigError);
    CHECK_THROWS_AS((void)parse_n_list("0,2"), ConfigError);
    CHECK_THROWS_AS((void)parse_n_list("5..2"), ConfigError);
    CHECK_THROWS_AS((void)parse_n_list("2..8:g1"), ConfigError);
    CHECK_THROWS_AS((void)parse_n_list("two"), ConfigError);
}

TEST_CASE("cli: table1 cells come from the library") {
    std::ostringstream table, csv;
    cmd_table1(table, OutputFormat::table);
    cmd_table1(csv, OutputFormat::csv);
    std::string t = table.str();
    CHECK(t.find("0.32195122") != std::string::npos); // PA N=2
    CHECK(t.find("0.45746346") != std::string::npos); // TI N=2
    CHECK(t.find("0.48424396") != std::string::npos); // PA N=8, computed value
    CHECK(t.find("0.50678218") != std::string::npos); // PA N=1024
    CHECK(t.find("0.50678365") != std::string::npos); // converged limit, 0.5067836549
    CHECK(t.find("0.30755") != std::string::npos);    // published PIMC reference
    // deterministic output
    std::ostringstream again;
    cmd_table1(again, OutputFormat::csv);
    CHECK(csv.str() == again.str());
    CHECK(csv.str().find("N,Sakkos-PA,PA,Sakkos-TI,TI") == 0);
}

TEST_CASE("cli: table2 cells") {
    std::ostringstream os;
    cmd_table2(os, OutputFormat::table);
    std::string t = os.str();
    CHECK(t.find("0.5067904") != std::string::npos); // BD* Hamiltonian, N=2
    CHECK(t.find("0.50660946") != std::string::npos); // BD' thermo, N=2
    CHECK(t.find("0.50444") != std::string::npos);    // CA1, N=2
}

TEST_CASE("cli: energies command reproduces library values") {
    RunConfig cfg;
    cfg.family = "pa";
    cfg.tau = 5.0;
    cfg.n_list = "2,4,8";
    cfg.kind = "thermo";
    cfg.format = OutputFormat::csv;
    std::ostringstream os;
    cmd_energies(cfg, os);
    std::istringstream in(os.str());
    std::string header, row;
    std::getline(in, header);
    CHECK(header == "label,N,tau,eps,E_T,Z");
    ContractedPropagator pa = make_pa();
    for (int n : {2, 4, 8}) {
        REQUIRE(std::getline(in, row));
        EnergyResult r = evaluate_tau(pa, n, 5.0);
        CHECK(row.find(sig10(r.e_thermo)) != std::string::npos);
    }

    // exactly one of tau/eps
    RunConfig bad = cfg;
    bad.eps = 1.0;
    std::ostringstream sink;
    CHECK_THROWS_AS(cmd_energies(bad, sink), ConfigError);
    RunConfig none;
    none.family = "pa";
    CHECK_THROWS_AS(cmd_energies(none, sink), ConfigError);
}

TEST_CASE("cli: propagator resolution") {
    RunConfig cfg;
    cfg.family = "bda";
    cfg.t1 = 0.3;
    cfg.alpha = 0.1;
    ContractedPropagator p = resolve_propagator(cfg);
    CHECK(p.zeta1(1.0) == doctest::Approx(make_bda(0.3, 0.1).zeta1(1.0)));

    RunConfig missing;
    missing.family = "bda"; // t1 required
    CHECK_THROWS_AS((void)resolve_propagator(missing), ConfigError);
    RunConfig unknown;
    unknown.family = "nope";
    CHECK_THROWS_AS((void)resolve_propagator(unknown), ConfigError);
    RunConfig empty;
    CHECK_THROWS_AS((void)resolve_propagator(empty), ConfigError);
}

TEST_CASE("cli: convergence command output") {
    RunConfig cfg;
    cfg.family = "pa";
    cfg.tau = 10.0;
    cfg.kind = "thermo";
    std::ostringstream os;
    cmd_convergence(cfg, os);
    std::string out = os.str();
    CHECK(out.find("eps,abs_error") == 0);
    CHECK(out.find("# fitted slope: ") != std::string::npos);
    CHECK(out.find("# nominal order: 2") != std::string::npos);
}

TEST_CASE("cli: optimize command output") {
    RunConfig cfg;
    cfg.family = "pa_ti";
    cfg.target = "fourth";
    std::ostringstream os;
    cmd_optimize(cfg, os);
    CHECK(os.str().find("0.02083333") != std::string::npos); // 1/48
    CHECK(os.str().find("status: solved") != std::string::npos);

    RunConfig bad = cfg;
    bad.target = "ninth";
    std::ostringstream sink;
    CHECK_THROWS_AS(cmd_optimize(bad, sink), ConfigError);
}

TEST_CASE("cli: oracle command output") {
    RunConfig cfg;
    cfg.family = "pa";
    cfg.tau = 2.0;
    cfg.n_list = "1";
    cfg.grid_points = 201;
    cfg.grid_half_width = 8.0;
    std::ostringstream os;
    cmd_oracle(cfg, os);
    CHECK(os.str().find("analytic") != std::string::npos);
    CHECK(os.str().find("E_H") != std::string::npos);
}

TEST_CASE("cli: figures emit one CSV per panel") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "pimc_ho_figs_test";
    fs::remove_all(dir);
    std::vector<std::string> files = cmd_figures(dir.string());
    CHECK(files.size() == 9);
    for (const std::string& f : files) {
        CHECK(fs::exists(f));
        std::ifstream in(f);
        std::string header;
        std::getline(in, header);
        bool known = header == "tau,estimator,energy" ||
                     header == "tau,propagator,estimator,energy" ||
                     header == "eps,propagator,estimator,rel_error";
        CHECK(known);
    }
    fs::remove_all(dir);
}

TEST_CASE("cli: precision backend from the environment") {
    unsetenv("PIMC_HO_PRECISION");
    CHECK(backend_from_env() == Backend::plain);
    setenv("PIMC_HO_PRECISION", "extended", 1);
    CHECK(backend_from_env() == Backend::extended);
    setenv("PIMC_HO_PRECISION", "double", 1);
    CHECK(backend_from_env() == Backend::plain);
    setenv("PIMC_HO_PRECISION", "quad", 1);
    CHECK_THROWS_AS((void)backend_from_env(), ConfigError);
    unsetenv("PIMC_HO_PRECISION");
}
