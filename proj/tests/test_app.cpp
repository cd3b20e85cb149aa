#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "jumpbsde/app.hpp"

using namespace jumpbsde;
using nlohmann::json;

namespace {

json base_config() {
    return json::parse(R"({
        "model": {"preset": "deterministic_grid", "K": 3, "m": 2, "a": 0.5},
        "generator": {"preset": "affine", "constant": 0.2, "ky": 0.4, "kc": 0.5, "km": 0.3},
        "terminal": {"preset": "jump_count"},
        "samples": 50
    })");
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("config parsing") {
    const RunConfig cfg = parse_config(base_config());
    CHECK(cfg.model.steps == 3);
    CHECK(cfg.generator.name == "affine");
    CHECK_FALSE(cfg.beta.has_value());
    CHECK_FALSE(cfg.delta.has_value());

    json doc = base_config();
    doc["beta"] = 4.0;
    doc["delta"] = "auto";
    CHECK(parse_config(doc).beta == 4.0);

    SUBCASE("unknown keys") {
        doc["model"]["colour"] = 1;
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
    }
    SUBCASE("wrong types") {
        doc["tol"] = "small";
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
    }
    SUBCASE("delta out of range") {
        doc["delta"] = 1.5;
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
    }
    SUBCASE("negative integer") {
        doc["seed"] = -3;
        CHECK_THROWS_AS(parse_config(doc), ConfigError);
    }
}

TEST_CASE("problem construction resolves beta") {
    RunConfig cfg = parse_config(base_config());
    const BsdeProblem auto_beta = build_problem(cfg);
    CHECK(auto_beta.beta > 0.0);
    cfg.beta_margin = 2.0;
    CHECK(build_problem(cfg).beta == doctest::Approx(2.0 * auto_beta.beta));
    cfg.generator.name = "mystery";
    CHECK_THROWS_AS(build_problem(cfg), ConfigError);
    cfg = parse_config(base_config());
    cfg.model.jumps = {1.5};
    CHECK_THROWS_AS(build_problem(cfg), ConfigError);
}

TEST_CASE("exit codes") {
    RunConfig cfg = parse_config(base_config());
    CHECK(cmd_solve(cfg).exit_code == kExitOk);
    CHECK(cmd_verify(cfg).exit_code == kExitOk);
    CHECK(cmd_sweep(cfg).exit_code == kExitOk);

    RunConfig bad = cfg;
    bad.generator.ky = 2.0;
    const auto violated = cmd_solve(bad);
    CHECK(violated.exit_code == kExitCondition);
    CHECK(violated.summary["diagnostics"]["flagged_slots"].size() > 0);

    RunConfig negative = cfg;
    negative.debug_apriori_constant = 0.01;
    CHECK(cmd_verify(negative).exit_code == kExitSolver);

    RunConfig ce;
    ce.model.name = "counterexample";
    ce.model.steps = 3;
    ce.model.jump_step = 2;
    ce.generator.name = "counterexample";
    ce.terminal.value = 1.0;
    const auto report = cmd_counterexample(ce);
    CHECK(report.exit_code == kExitOk);
    CHECK(report.summary["oracle"] == "StepSingular");
    CHECK_THROWS_AS(cmd_counterexample(cfg), ConfigError);
}

TEST_CASE("spec examples through the command layer") {
    SUBCASE("one coin flip gives Y_0 = 1/2") {
        RunConfig cfg = parse_config(json::parse(R"({
            "model": {"preset": "deterministic_grid", "K": 1, "m": 1, "a": 0.5},
            "terminal": {"preset": "jump_count"}, "beta": 1.0})"));
        const auto r = cmd_solve(cfg);
        CHECK(r.exit_code == kExitOk);
        CHECK(r.summary["solution"]["y0"].get<double>() == doctest::Approx(0.5));
    }
    SUBCASE("zero data") {
        const auto r = cmd_solve(parse_config(json::parse(R"({"model": {"K": 3, "m": 2}})")));
        CHECK(r.summary["solution"]["y0"].get<double>() == 0.0);
        CHECK(r.summary["solution"]["iterations"] == 1);
    }
    SUBCASE("counterexample config is a condition violation for solve") {
        const auto r = cmd_solve(parse_config(json::parse(R"({
            "model": {"preset": "counterexample", "K": 3, "p": 0.5, "jump_step": 2},
            "generator": {"preset": "counterexample"}, "beta": 1.0})")));
        CHECK(r.exit_code == kExitCondition);
        REQUIRE(r.summary["diagnostics"]["flagged_slots"].size() == 1);
        CHECK(r.summary["diagnostics"]["flagged_slots"][0]["value"] == 2.0);
    }
    SUBCASE("beta = 0 keeps the identity and skips inequality (f)") {
        RunConfig cfg = parse_config(base_config());
        cfg.beta = 0.0;
        const auto r = cmd_verify(cfg);
        CHECK(r.exit_code == kExitOk);
        const std::string& table = r.files.at(0).second;
        CHECK(table.find("energy_identity,identity") != std::string::npos);
        CHECK(table.find("skipped: beta = 0") != std::string::npos);
    }
    SUBCASE("empty sweep grid gives a header-only table") {
        const auto r = cmd_sweep(parse_config(base_config()));
        const std::string& table = r.files.at(0).second;
        CHECK(std::count(table.begin(), table.end(), '\n') == 1);
    }
}

TEST_CASE("reports are deterministic and well formed") {
    RunConfig cfg = parse_config(base_config());
    cfg.sweep.deltas = {0.1, 0.3};
    const auto dir = std::filesystem::temp_directory_path() / "jumpbsde_app_test";
    std::filesystem::remove_all(dir);
    for (auto* cmd : {&cmd_solve, &cmd_verify, &cmd_sweep}) {
        write_report((*cmd)(cfg), dir / "a");
        write_report((*cmd)(cfg), dir / "b");
    }
    std::size_t files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir / "a")) {
        const auto name = entry.path().filename();
        const std::string a = read_file(entry.path());
        CHECK(a == read_file(dir / "b" / name));
        if (name.extension() == ".csv") {
            const std::string header = a.substr(0, a.find('\n'));
            CHECK(header.find(',') != std::string::npos);
        }
        ++files;
    }
    CHECK(files >= 5);
    const json summary = json::parse(read_file(dir / "a" / "summary.json"));
    CHECK(summary.contains("status"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("number formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    CHECK(format_double(1.0 / 0.0) == "inf");
    CHECK(format_double(std::nan("")) == "nan");
}
