#include "catch_amalgamated.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mcvd/experiment.hpp"

using namespace mcvd;
namespace fs = std::filesystem;

namespace {

const fs::path kExamples = fs::path(MCVD_SOURCE_DIR) / "examples";

const char* kSmall = R"([experiment]
name = small

[pulse]
family = uniform
subslots = 4
budget = molecules
molecules = 80000

[channel]
relay_um = 70 5 5

[reception]
isi_length = 0
t_s_ms = 5

[sweep]
axis = t_s
values = 4 5 6

[oracles]
seed = 99
mc_bits = 20000
)";

std::string expect_config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<no error>";
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("mcvd_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(MCVD_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("every example config parses", "[experiment]") {
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(kExamples)) {
        if (entry.path().extension() != ".cfg") continue;
        INFO(entry.path());
        CHECK_NOTHROW(load_config(entry.path().string()));
        ++seen;
    }
    CHECK(seen >= 8);
    const auto opt = load_config((kExamples / "optimize_ts.cfg").string());
    REQUIRE(opt.cases.size() == 4);
    CHECK(opt.cases[2].scenario.drift_um_s.y == 60.0);
    CHECK(opt.cases[2].scenario.relay_um.z == 13.0);
    CHECK(opt.optimizer.t_max == Catch::Approx(0.1));
}

TEST_CASE("config errors name the offending field", "[experiment]") {
    CHECK(expect_config_error("[sweep]\nfrom = 1\n") == "sweep.axis");
    CHECK(expect_config_error("[sweep]\naxis = q\nvalues = 1\n") == "sweep.axis");
    CHECK(expect_config_error("[channel]\nspeed = 3\n") == "channel.speed");
    CHECK(expect_config_error("[bogus]\nx = 1\n") == "bogus");
    CHECK(expect_config_error("[pulse]\nfamily = gaussian\n") == "pulse.family");
    CHECK(expect_config_error("[reception]\nisi_length = 31\n") == "reception.isi_length");
    CHECK(expect_config_error("[experiment]\ncases = x\n[case:x]\npulse.family = box\n") == "case:x.pulse.family");
    CHECK(expect_config_error("[experiment]\ncases = y\n") == "experiment.cases");
    CHECK(expect_config_error("[oracles]\nmc_bits = 10\n") == "oracles.mc_bits");
}

TEST_CASE("defaults reproduce the baseline operating point", "[experiment]") {
    const auto cfg = parse_config(std::string());
    CHECK(cfg.scenario.destination() == Vec3{200, 24, 28});
    CHECK(cfg.scenario.isi_length == 10);
    CHECK(cfg.scenario.t_s_ms == 18.0);
    CHECK(cfg.scenario.pulse().total() > 0);
}

TEST_CASE("a sweep row matches direct library calls", "[experiment]") {
    const auto cfg = parse_config(std::string(kSmall));
    const auto rows = run_sweep(cfg);
    REQUIRE(rows.size() == 3);
    ScenarioSpec s = cfg.scenario;
    s.t_s_ms = 5;
    const auto ev = evaluate_link(s.link(), 0.005, true);
    CHECK(rows[1].ber_relay == ev.pe_relay);
    CHECK(rows[1].ber_direct == ev.pe_direct);
    CHECK(rows[1].objective == ev.objective);
    CHECK(rows[1].molecules == 80000);
    CHECK(rows[1].status == "ok");
}

TEST_CASE("sweep CSV layout", "[experiment]") {
    auto cfg = parse_config(std::string(kSmall));
    cfg.oracles.mc = true;
    const std::string csv = sweep_csv(cfg, run_sweep(cfg));
    std::istringstream in(csv);
    std::string header, line;
    std::getline(in, header);
    CHECK(header ==
          "t_s_ms,ber_direct,ber_relay,half_minus_ber_relay,ber_relay_chain,energy_fJ,molecules,objective_bit_s,"
          "clamped_increments,mc_ber_relay,mc_ber_relay_se,mc_bits,status");
    std::getline(in, line);
    CHECK(line.rfind("4.00000000e+00,", 0) == 0);
    CHECK(line.ends_with(",20000,ok"));
}

TEST_CASE("sweeps are reproducible across thread counts", "[experiment][property]") {
    auto cfg = parse_config(std::string(kSmall));
    cfg.oracles.mc = true;
    cfg.oracles.rng.threads = 1;
    const auto one = sweep_csv(cfg, run_sweep(cfg));
    cfg.oracles.rng.threads = 3;
    CHECK(sweep_csv(cfg, run_sweep(cfg)) == one);
    cfg.oracles.rng.seed += 1;
    CHECK(sweep_csv(cfg, run_sweep(cfg)) != one);
}

TEST_CASE("unaffordable sweep points are marked, not dropped", "[experiment]") {
    auto cfg = parse_config(std::string("[sweep]\naxis = energy_budget\nvalues = 0.001 1000\n"));
    const auto rows = run_sweep(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].status == "infeasible_budget");
    CHECK(rows[0].ber_relay == 0.5);
    CHECK(rows[1].status == "ok");
    CHECK(sweep_csv(cfg, rows).find("infeasible_budget") != std::string::npos);
}

TEST_CASE("optimizer run reports trace, grid and scan", "[experiment]") {
    auto cfg = load_config((kExamples / "optimize_ts.cfg").string());
    cfg.cases.resize(1);
    cfg.grid_points = 200;
    cfg.scan_points = 50;
    const auto res = run_optimize(cfg);
    REQUIRE(res.size() == 1);
    const auto& r = res[0];
    CHECK(r.optimum.trace.size() == static_cast<std::size_t>(r.optimum.iterations));
    CHECK(r.optimum.f_star > 0);
    CHECK(r.grid_f - r.optimum.f_star <= 0.05 * r.grid_f);
    CHECK(r.scan.signs.size() == 50);
    const auto trace = trace_csv(res);
    CHECK(trace.rfind("case,iteration,level_bit_s,lower_bit_s,upper_bit_s,feasible,witness_t_ms\n", 0) == 0);
    CHECK(optimum_csv(res).find("vy40_rz13,") != std::string::npos);
}

TEST_CASE("oracle suite: empty and negative control", "[experiment][oracle]") {
    auto cfg = parse_config(std::string(kSmall));
    cfg.validate.presence_points = 0;
    cfg.validate.moment_instances = 0;
    cfg.validate.ber_bits = 0;
    const auto empty = validate_oracles(cfg);
    CHECK(empty.checks.empty());
    CHECK(empty.passed());

    cfg.validate.presence_points = 6;
    cfg.validate.presence_trials = 200'000;
    cfg.validate.corruption = 1.5;
    const auto corrupted = validate_oracles(cfg);
    CHECK_FALSE(corrupted.passed());
    CHECK(corrupted.to_csv().find("FAIL") != std::string::npos);
}

TEST_CASE("command-line exit codes", "[experiment][cli]") {
    const auto good = scratch("small.cfg");
    std::ofstream(good) << kSmall;
    const auto out = scratch("small.csv");
    CHECK(run_cli("sweep --config " + good.string() + " --out " + out.string()) == 0);
    CHECK(slurp(out).rfind("t_s_ms,", 0) == 0);

    const auto broken = scratch("broken.cfg");
    std::ofstream(broken) << "[channel]\nspeed = 1\n";
    CHECK(run_cli("sweep --config " + broken.string()) == 2);
    CHECK(run_cli("sweep --config /nonexistent.cfg") == 2);
    CHECK(run_cli("sweep") == 2);

    const auto poor = scratch("poor.cfg");
    std::ofstream(poor) << "[sweep]\naxis = energy_budget\nvalues = 0.001\n";
    CHECK(run_cli("sweep --config " + poor.string() + " --out " + scratch("poor.csv").string()) == 3);

    const auto control = scratch("control.cfg");
    std::ofstream(control) << "[validate]\npresence_points = 4\npresence_trials = 100000\nmoment_instances = 0\n"
                              "ber_bits = 0\ncorruption = 1.5\n";
    CHECK(run_cli("validate --config " + control.string() + " --out " + scratch("control.csv").string()) == 4);
}

TEST_CASE("output directory from the environment", "[experiment][cli]") {
    const auto dir = scratch("outdir");
    fs::create_directories(dir);
    const auto cfg = scratch("named.cfg");
    std::ofstream(cfg) << kSmall;
    ::setenv("MCVD_OUT_DIR", dir.c_str(), 1);
    const int code = run_cli("sweep --config " + cfg.string());
    ::unsetenv("MCVD_OUT_DIR");
    CHECK(code == 0);
    CHECK(fs::exists(dir / "small.csv"));
}
