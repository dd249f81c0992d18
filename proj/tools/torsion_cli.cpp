// twophase-torsion: classification, Q-curves, phase sweeps and oracle checks
// for the concentric two-phase torsion problem.

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include "torsion/errors.hpp"
#include "torsion/report.hpp"

namespace cli = torsion::cli;

int main(int argc, char** argv) {
    CLI::App app{"Second-order shape analysis of the two-phase torsion problem on the unit ball"};
    app.set_config("--config", "", "key = value configuration file; command-line flags take precedence");
    app.require_subcommand(1);

    cli::RunConfig cfg;
    std::string constraint = "volume";
    std::string format = "json";
    int kmax = 0;
    double t_max = 0.0;

    app.add_option("--dim", cfg.dim, "Space dimension N >= 2")->capture_default_str();
    app.add_option("--radius", cfg.radius, "Interface radius R in (0, 1)")->capture_default_str();
    app.add_option("--sigma-in", cfg.sigma_in, "Inner conductivity sigma_-")->capture_default_str();
    app.add_option("--sigma-out", cfg.sigma_out, "Outer conductivity sigma_+")->capture_default_str();
    app.add_option("--constraint", constraint, "volume | perimeter")->capture_default_str();
    app.add_option("--kmin", cfg.kmin, "Smallest harmonic degree")->capture_default_str();
    auto* kmax_opt = app.add_option("--kmax", kmax, "Largest harmonic degree (qcurve: 20, verify: kmin + 2)");
    app.add_option("--mesh-h", cfg.mesh_h, "FEM mesh size on the coarsest level")->capture_default_str();
    app.add_option("--levels", cfg.mesh_levels, "FEM mesh levels (h, h/2, ...)")->capture_default_str();
    auto* tmax_opt = app.add_option("--t-max", t_max, "Largest |t|; uniform samples instead of the default list");
    app.add_option("--n-t", cfg.n_t, "Positive t samples when --t-max is given")->capture_default_str();
    app.add_option("--suite", cfg.suite, "verify: radial | fem | all")->capture_default_str();
    app.add_option("--cells", cfg.radial_cells, "verify: radial grid cells")->capture_default_str();
    app.add_option("--rho-min", cfg.rho_min, "sweep: smallest rho")->capture_default_str();
    app.add_option("--rho-max", cfg.rho_max, "sweep: largest rho")->capture_default_str();
    app.add_option("--rho-count", cfg.rho_count, "sweep: rho samples (log-spaced)")->capture_default_str();
    app.add_option("--radius-min", cfg.radius_min, "sweep: smallest R")->capture_default_str();
    app.add_option("--radius-max", cfg.radius_max, "sweep: largest R")->capture_default_str();
    app.add_option("--radius-count", cfg.radius_count, "sweep: R samples")->capture_default_str();
    app.add_option("--out", cfg.out, "Output path (default: stdout)");
    app.add_option("--format", format, "csv | json")->capture_default_str();

    using Command = std::function<cli::Report(const cli::RunConfig&)>;
    Command command;
    auto add = [&](const char* name, const char* help, Command fn) {
        app.add_subcommand(name, help)->fallthrough()->callback([&command, fn] { command = fn; });
    };
    add("classify", "Classify the concentric configuration", cli::cmd_classify);
    add("qcurve", "Tabulate Q(k) and Q~(k)", cli::cmd_qcurve);
    add("sweep", "Phase map over a (rho, R) grid", cli::cmd_sweep);
    add("verify", "Run the radial and/or finite-element oracles", cli::cmd_verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kUsage;
    }

    cli::Format fmt;
    try {
        cfg.constraint = torsion::parse_constraint(constraint);
        fmt = cli::parse_format(format);
        if (kmax_opt->count() > 0) cfg.kmax = kmax;
        if (tmax_opt->count() > 0) cfg.t_max = t_max;
        cfg.format = fmt;
        cfg.validate();
    } catch (const torsion::DomainError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return cli::kUsage;
    }

    cli::Report report;
    std::string text;
    try {
        report = command(cfg);
        text = report.render(fmt);
    } catch (const torsion::DomainError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return cli::kUsage;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return cli::kNumerical;
    }

    if (cfg.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream os(cfg.out, std::ios::binary);
        if (!os) {
            std::cerr << "cannot open output file " << cfg.out << "\n";
            return cli::kUsage;
        }
        os << text;
    }
    if (!report.passed) {
        std::cerr << "verification failed\n";
        return cli::kNumerical;
    }
    return cli::kOk;
}
