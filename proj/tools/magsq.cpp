// magsq: command-line front end for the scenario runner
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 convergence flag with --strict.

#include "magsq/errors.hpp"
#include "magsq/format.hpp"
#include "magsq/scenarios.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace sc = magsq::scenarios;

namespace {

struct Flags {
    std::string config;
    std::string out;
    int threads = 0;
    int fock_dim = 0;
    std::string scenario;
    bool strict = false;
    bool no_convergence = false;
    bool quiet = false;
};

sc::ScenarioConfig make_config(const Flags& f, const std::string& scenario) {
    auto raw = f.config.empty() ? magsq::config::RawConfig{} : magsq::config::RawConfig::load(f.config);
    std::vector<std::string> keys;
    for (const auto& k : sc::key_registry()) keys.push_back(k.key);
    raw.apply_env(keys);
    if (!scenario.empty()) raw.set("scenario", scenario, "cli");
    if (!f.out.empty()) raw.set("output_dir", f.out, "cli");
    if (f.threads > 0) raw.set("threads", std::to_string(f.threads), "cli");
    if (f.fock_dim > 0) raw.set("fock_dim", std::to_string(f.fock_dim), "cli");
    return sc::build_config(std::move(raw));
}

int report(const sc::RunManifest& m, const Flags& f) {
    std::cout << m.scenario << ": " << m.outputs.size() << " files, " << magsq::fmt_num(m.wall_clock_s) << " s\n";
    for (const auto& [k, v] : m.summary.items())
        if (!v.is_object() && !v.is_array()) std::cout << "  " << k << " = " << v.dump() << "\n";
    for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
    if (m.convergence) {
        const auto& c = *m.convergence;
        if (c.point == "none") {
            std::cout << "  convergence: " << c.note << "\n";
            return 0;
        }
        std::cout << "  convergence N=" << c.fock_dim << " vs " << c.fock_dim_ref
                  << ": max|dS| = " << magsq::fmt_num(c.max_dS_db)
                  << " dB, max|dW| = " << magsq::fmt_num(c.max_wigner_diff) << (c.flagged ? " FLAGGED" : " ok") << "\n";
        if (c.flagged && f.strict) return 4;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"magnon squeezing in a flux-qubit / YIG hybrid"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;
    app.add_option("--config", f.config, "configuration file");
    app.add_option("--out", f.out, "output directory");
    app.add_option("--threads", f.threads, "worker threads for sweeps and grids");
    app.add_option("--fock-dim", f.fock_dim, "magnon truncation");
    app.add_option("--scenario", f.scenario, "scenario name (overrides the config)");
    app.add_flag("--strict", f.strict, "exit 4 when the convergence check flags");
    app.add_flag("--no-convergence", f.no_convergence, "skip the truncation convergence check");
    app.add_flag("--quiet", f.quiet, "no progress messages");

    struct Cmd {
        const char* name;
        const char* help;
        std::vector<std::string> scenarios;   // default scenarios when --scenario is absent
    };
    const std::vector<Cmd> cmds = {
        {"coupling-map", "coupling maps g(R, I_p) and g(R, x0)", {"coupling_map_a", "coupling_map_b"}},
        {"squeeze", "full vs effective squeezing dynamics", {"squeeze_compare"}},
        {"sweep", "kappa and temperature sweeps", {"kappa_sweep", "temperature_sweep"}},
        {"heatmap", "maximum squeezing over (kappa, gamma)", {"max_squeeze_heatmap"}},
        {"superpose", "analytic psi+- states and norms", {}},
        {"wigner", "Wigner functions of psi+-", {"superposition_wigner"}},
        {"fidelity", "fidelity of dissipative psi+-", {"superposition_fidelity"}},
        {"calibrate", "Delta_eff calibration scan", {}},
        {"converge", "truncation convergence check", {}},
        {"run", "run the configured scenario", {}},
    };
    std::vector<CLI::App*> subs;
    for (const auto& c : cmds) subs.push_back(app.add_subcommand(c.name, c.help));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const sc::Progress progress = [&](const std::string& msg) {
        if (!f.quiet) std::cerr << "[magsq] " << msg << std::endl;
    };
    try {
        int rc = 0;
        for (std::size_t i = 0; i < cmds.size(); ++i) {
            if (!subs[i]->parsed()) continue;
            const std::string name = cmds[i].name;
            if (name == "superpose") return report(sc::run_superpose(make_config(f, f.scenario), progress), f);
            if (name == "calibrate") return report(sc::run_calibrate(make_config(f, f.scenario), progress), f);
            if (name == "converge") return report(sc::run_converge(make_config(f, f.scenario), progress), f);
            std::vector<std::string> list = cmds[i].scenarios;
            if (!f.scenario.empty() || list.empty()) list = {f.scenario};
            for (const auto& s : list) {
                const auto cfg = make_config(f, s);
                rc = std::max(rc, report(sc::run(cfg, !f.no_convergence, progress), f));
            }
        }
        return rc;
    } catch (const magsq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const magsq::ContractError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const magsq::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
