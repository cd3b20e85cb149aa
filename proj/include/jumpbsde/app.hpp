#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jumpbsde/scenarios.hpp"
#include "jumpbsde/solver.hpp"
#include "jumpbsde/verification.hpp"

namespace jumpbsde {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitCondition = 2,
    kExitSolver = 3,
};

struct GeneratorSpec {
    std::string name = "zero";
    double constant = 0.0;
    double per_jump = 0.0;
    double ky = 0.0;
    double kc = 0.0;
    double km = 0.0;
    double kz = 0.0;
};

struct TerminalSpec {
    std::string name = "constant";
    double value = 0.0;
    double scale = 1.0;
    double offset = 0.0;
    std::size_t mark = 0;
};

struct SweepSpec {
    std::vector<double> beta_multipliers;
    std::vector<double> betas;
    std::vector<double> deltas;
    std::vector<std::size_t> steps;
};

struct RunConfig {
    ModelSpec model;
    GeneratorSpec generator;
    TerminalSpec terminal;
    std::optional<double> beta;  // empty: auto = beta_min(delta) * beta_margin
    double beta_margin = 1.0;
    std::optional<double> delta;  // empty: eps* / 2
    double tol = 1e-12;
    int max_iter = 2000;
    std::uint64_t seed = 1;
    std::size_t samples = 1000;
    SweepSpec sweep;
    std::size_t counterexample_iterations = 50;
    std::optional<double> debug_apriori_constant;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

Generator make_generator(const GeneratorSpec& spec, const ModelSpec& model);
TerminalFn make_terminal(const TerminalSpec& spec);

// Resolves beta ("auto" included) and builds the problem. Throws
// ConditionViolated when auto beta is requested under a violated hypothesis.
BsdeProblem build_problem(const RunConfig& config);

struct RunReport {
    nlohmann::json summary;
    std::vector<std::pair<std::string, std::string>> files;  // name -> contents
    int exit_code = kExitOk;
};

RunReport cmd_solve(const RunConfig& config);
RunReport cmd_verify(const RunConfig& config);
RunReport cmd_sweep(const RunConfig& config);
RunReport cmd_counterexample(const RunConfig& config);

// Writes summary.json and every CSV table into `dir`.
void write_report(const RunReport& report, const std::filesystem::path& dir);

std::string format_double(double v);

}  // namespace jumpbsde
