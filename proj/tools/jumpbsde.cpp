#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "jumpbsde/app.hpp"
#include "jumpbsde/errors.hpp"

using namespace jumpbsde;

namespace {

struct Flags {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> beta;
    std::optional<double> delta;
    std::optional<double> tol;
    std::optional<double> debug_apriori_constant;
};

void add_common(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--config", flags.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", flags.out, "output directory");
    cmd->add_option("--seed", flags.seed, "random seed");
    cmd->add_option("--beta", flags.beta, "weight exponent, 'auto' or a number");
    cmd->add_option("--delta", flags.delta, "contraction target in (0, 1)");
    cmd->add_option("--tol", flags.tol, "Picard stopping tolerance");
}

RunConfig apply_flags(RunConfig cfg, const Flags& flags) {
    if (flags.seed)
        cfg.seed = *flags.seed;
    if (flags.beta) {
        if (*flags.beta == "auto") {
            cfg.beta.reset();
        } else {
            try {
                std::size_t used = 0;
                cfg.beta = std::stod(*flags.beta, &used);
                if (used != flags.beta->size())
                    throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw ConfigError("--beta expects 'auto' or a number");
            }
            if (!(*cfg.beta >= 0.0))
                throw ConfigError("beta must be nonnegative");
        }
    }
    if (flags.delta) {
        if (!(*flags.delta > 0.0 && *flags.delta < 1.0))
            throw ConfigError("delta must lie in (0, 1)");
        cfg.delta = flags.delta;
    }
    if (flags.tol) {
        if (!(*flags.tol > 0.0))
            throw ConfigError("tol must be positive");
        cfg.tol = *flags.tol;
    }
    if (flags.debug_apriori_constant)
        cfg.debug_apriori_constant = flags.debug_apriori_constant;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-scenario solver and checker for BSDEs driven by jump processes"};
    app.require_subcommand(1);

    Flags flags;
    auto* solve = app.add_subcommand("solve", "solve the configured problem");
    auto* verify = app.add_subcommand("verify", "run the identity and inequality checks");
    auto* sweep = app.add_subcommand("sweep", "sweep beta, delta or the grid size");
    auto* counter = app.add_subcommand("counterexample", "reproduce the single-jump counterexample");
    for (auto* cmd : {solve, verify, sweep, counter})
        add_common(cmd, flags);
    verify->add_option("--debug-apriori-constant", flags.debug_apriori_constant)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    const auto started = std::chrono::steady_clock::now();
    try {
        const RunConfig cfg = apply_flags(load_config(flags.config), flags);
        RunReport report;
        if (solve->parsed())
            report = cmd_solve(cfg);
        else if (verify->parsed())
            report = cmd_verify(cfg);
        else if (sweep->parsed())
            report = cmd_sweep(cfg);
        else
            report = cmd_counterexample(cfg);
        write_report(report, flags.out);
        const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
        std::cerr << report.summary.value("status", std::string("?")) << " (" << elapsed.count()
                  << " s)\n";
        return report.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ConditionViolated& e) {
        std::cerr << "condition violated: " << e.what() << '\n';
        return kExitCondition;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolver;
    }
}
