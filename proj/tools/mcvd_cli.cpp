// mcvd: sweep / optimize / validate driver.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mcvd/experiment.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kInfeasible = 3, kOracle = 4 };

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::int64_t> mc_bits;
    bool no_mc = false;
};

// --out wins; then the config's output name inside $MCVD_OUT_DIR (or the working directory).
std::string output_path(const Options& opt, const mcvd::ExperimentConfig& cfg, const std::string& suffix) {
    if (!opt.out.empty()) return opt.out;
    const std::string file = (cfg.output.empty() ? cfg.name + suffix : cfg.output);
    if (const char* dir = std::getenv("MCVD_OUT_DIR"); dir && *dir) return (fs::path(dir) / file).string();
    return file;
}

std::string sibling(const std::string& path, const std::string& tag) {
    fs::path p(path);
    return (p.parent_path() / (p.stem().string() + tag + p.extension().string())).string();
}

mcvd::ExperimentConfig load(const Options& opt) {
    auto cfg = mcvd::load_config(opt.config);
    if (opt.seed) cfg.oracles.rng.seed = *opt.seed;
    if (opt.mc_bits) {
        if (*opt.mc_bits < 1000) throw mcvd::ConfigError("--mc-bits", "must be >= 1000");
        cfg.oracles.mc_bits = *opt.mc_bits;
        cfg.validate.ber_bits = *opt.mc_bits;
        cfg.oracles.mc = true;
    }
    if (opt.no_mc) {
        cfg.oracles.mc = false;
        cfg.validate.ber_bits = 0;
    }
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
    return cfg;
}

int cmd_sweep(const Options& opt) {
    const auto cfg = load(opt);
    const auto rows = mcvd::run_sweep(cfg);
    const std::string path = output_path(opt, cfg, ".csv");
    mcvd::write_text(path, mcvd::sweep_csv(cfg, rows));
    int infeasible = 0;
    for (const auto& r : rows) infeasible += r.status != "ok";
    std::cerr << "wrote " << rows.size() << " rows to " << path << "\n";
    if (infeasible == static_cast<int>(rows.size()) && !rows.empty()) return kInfeasible;
    return kOk;
}

int cmd_optimize(const Options& opt) {
    const auto cfg = load(opt);
    const auto results = mcvd::run_optimize(cfg);
    const std::string path = output_path(opt, cfg, ".csv");
    mcvd::write_text(path, mcvd::optimum_csv(results));
    mcvd::write_text(sibling(path, "_trace"), mcvd::trace_csv(results));
    for (const auto& r : results)
        std::cerr << r.name << ": t* = " << r.optimum.t_star * 1e3 << " ms, F* = " << r.optimum.f_star
                  << " bit/s (grid max " << r.grid_f << " at " << r.grid_t * 1e3 << " ms)\n";
    return kOk;
}

int cmd_validate(const Options& opt) {
    const auto cfg = load(opt);
    const auto report = mcvd::validate_oracles(cfg);
    const std::string path = output_path(opt, cfg, "_validate.csv");
    mcvd::write_text(path, report.to_csv());
    std::cerr << report.checks.size() << " checks, " << report.failures() << " failed; report in " << path << "\n";
    return report.passed() ? kOk : kOracle;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relay-assisted diffusion channel: BER sweeps, symbol-duration optimization, oracle checks"};
    app.require_subcommand(1);
    Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "experiment config (INI)")->required();
        sub->add_option("--seed", opt.seed, "RNG seed override");
        sub->add_option("--out", opt.out, "output CSV path");
        sub->add_option("--mc-bits", opt.mc_bits, "simulated bits per Monte Carlo run (enables MC)");
        sub->add_flag("--no-mc", opt.no_mc, "disable Monte Carlo cross-checks");
    };
    auto* sweep = app.add_subcommand("sweep", "evaluate BER and rate along one parameter axis");
    auto* optimize = app.add_subcommand("optimize", "bisection search for the best symbol duration");
    auto* validate = app.add_subcommand("validate", "run the oracle suite");
    for (auto* s : {sweep, optimize, validate}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (sweep->parsed()) return cmd_sweep(opt);
        if (optimize->parsed()) return cmd_optimize(opt);
        return cmd_validate(opt);
    } catch (const mcvd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const mcvd::InfeasibleBudgetError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}
