#pragma once

// Declarative experiments: INI config -> scenario, sweeps, optimizer runs and the oracle suite.
// Config units: positions um, velocities um/s, times ms, energies fJ, diffusion m^2/s.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mcvd/energy.hpp"
#include "mcvd/errors.hpp"
#include "mcvd/link.hpp"
#include "mcvd/modulation.hpp"
#include "mcvd/montecarlo.hpp"
#include "mcvd/optimizer.hpp"
#include "mcvd/validation.hpp"

namespace mcvd {

inline constexpr double kMicrometer = 1e-6;
inline constexpr double kMillisecond = 1e-3;

enum class SweepAxis { t_s, R_y, R_z, V_y, V_z, J, energy_budget };
enum class BudgetMode { energy, molecules };

inline SweepAxis parse_sweep_axis(const std::string& s) {
    static const std::map<std::string, SweepAxis> names{
        {"t_s", SweepAxis::t_s}, {"R_y", SweepAxis::R_y}, {"R_z", SweepAxis::R_z}, {"V_y", SweepAxis::V_y},
        {"V_z", SweepAxis::V_z}, {"J", SweepAxis::J},     {"energy_budget", SweepAxis::energy_budget}};
    const auto it = names.find(s);
    if (it == names.end()) throw ConfigError("sweep.axis", "unknown axis '" + s + "'");
    return it->second;
}

/// CSV column name (with unit) of a sweep axis.
inline std::string axis_column(SweepAxis a) {
    switch (a) {
        case SweepAxis::t_s: return "t_s_ms";
        case SweepAxis::R_y: return "R_y_um";
        case SweepAxis::R_z: return "R_z_um";
        case SweepAxis::V_y: return "V_y_um_s";
        case SweepAxis::V_z: return "V_z_um_s";
        case SweepAxis::J: return "J";
        case SweepAxis::energy_budget: return "energy_budget_fJ";
    }
    return "?";
}

struct ScenarioSpec {
    double diffusion_t = 4e-9;
    double diffusion_u = 4e-9;
    double stokes_radius_nm = 2.68;  ///< recorded only
    Vec3 drift_um_s{100, 40, 40};
    Vec3 relay_um{100, 12, 14};
    double relay_radius_um = 50;
    std::optional<Vec3> destination_um;  ///< default 2 * relay
    double destination_radius_um = 50;

    ShapeFamily family = ShapeFamily::exponential();
    int subslots = 10;
    BudgetMode budget = BudgetMode::energy;
    double energy_fJ = 1000;
    std::int64_t molecules = 10000;
    EnergyParams energy;

    int isi_length = 10;
    Priors priors;
    NoiseParams relay_noise;
    NoiseParams destination_noise;
    RelayPriorMode relay_prior = RelayPriorMode::source;
    double t_s_ms = 18;

    [[nodiscard]] Vec3 destination() const { return destination_um.value_or(2.0 * relay_um); }

    /// Pulse released by both the source and the relay.
    [[nodiscard]] PulseShape pulse() const {
        const double t_s = t_s_ms * kMillisecond;
        if (budget == BudgetMode::molecules) return make_pulse(family, subslots, molecules, t_s);
        return scale_to_energy(family, subslots, t_s, energy_fJ * kFemtojoule, energy);
    }

    [[nodiscard]] LinkScenario link() const {
        LinkScenario sc;
        sc.diffusion_t = diffusion_t;
        sc.diffusion_u = diffusion_u;
        sc.drift = kMicrometer * drift_um_s;
        sc.relay = {kMicrometer * relay_um, relay_radius_um * kMicrometer};
        sc.destination = {kMicrometer * destination(), destination_radius_um * kMicrometer};
        sc.source_pulse = pulse();
        sc.relay_pulse = sc.source_pulse;
        sc.isi_length = isi_length;
        sc.priors = priors;
        sc.relay_noise = relay_noise;
        sc.destination_noise = destination_noise;
        sc.relay_prior_mode = relay_prior;
        return sc;
    }

    void apply(SweepAxis axis, double v) {
        switch (axis) {
            case SweepAxis::t_s: t_s_ms = v; break;
            case SweepAxis::R_y: relay_um.y = v; break;
            case SweepAxis::R_z: relay_um.z = v; break;
            case SweepAxis::V_y: drift_um_s.y = v; break;
            case SweepAxis::V_z: drift_um_s.z = v; break;
            case SweepAxis::J: isi_length = static_cast<int>(std::lround(v)); break;
            case SweepAxis::energy_budget:
                budget = BudgetMode::energy;
                energy_fJ = v;
                break;
        }
    }
};

struct SweepSpec {
    SweepAxis axis = SweepAxis::t_s;
    std::vector<double> values;  ///< config units
};

struct OracleToggles {
    bool mc = false;
    std::int64_t mc_bits = 100'000;
    RngConfig rng;
};

struct ValidateSpec {
    int presence_points = 20;
    std::int64_t presence_trials = 1'000'000;
    int moment_instances = 5;
    std::int64_t moment_trials = 1'000'000;
    std::int64_t ber_bits = 1'000'000;
    double corruption = 1.0;  ///< multiplies the analytic presence value (negative control)
};

struct CaseSpec {
    std::string name;
    ScenarioSpec scenario;
};

struct ExperimentConfig {
    std::string name = "experiment";
    ScenarioSpec scenario;
    std::optional<SweepSpec> sweep;
    OptimizerConfig optimizer;
    int scan_points = 500;
    int grid_points = 10'000;
    std::vector<CaseSpec> cases;
    OracleToggles oracles;
    ValidateSpec validate;
    std::string output;
    std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------------------------
// Parsing

namespace detail {

using boost::property_tree::ptree;

inline ptree::path_type key_path(const std::string& section, const std::string& key) {
    return ptree::path_type(section + "/" + key, '/');
}

class ConfigReader {
public:
    explicit ConfigReader(const ptree& tree) : tree_(tree) {}

    [[nodiscard]] std::optional<std::string> raw(const std::string& section, const std::string& key) const {
        if (auto v = tree_.get_optional<std::string>(key_path(section, key))) return *v;
        return std::nullopt;
    }

    template <class T>
    void read(const std::string& section, const std::string& key, T& out) const {
        const auto v = raw(section, key);
        if (!v) return;
        std::istringstream in(*v);
        T value{};
        if (!(in >> value) || !(in >> std::ws).eof())
            throw ConfigError(section + "." + key, "cannot parse '" + *v + "'");
        out = value;
    }

    void read(const std::string& section, const std::string& key, bool& out) const {
        const auto v = raw(section, key);
        if (!v) return;
        if (*v == "true" || *v == "1" || *v == "yes") out = true;
        else if (*v == "false" || *v == "0" || *v == "no") out = false;
        else throw ConfigError(section + "." + key, "expected a boolean, got '" + *v + "'");
    }

    [[nodiscard]] std::vector<double> list(const std::string& section, const std::string& key) const {
        std::vector<double> out;
        const auto v = raw(section, key);
        if (!v) return out;
        std::istringstream in(*v);
        double x;
        while (in >> x) out.push_back(x);
        if (!in.eof()) throw ConfigError(section + "." + key, "cannot parse number list '" + *v + "'");
        return out;
    }

    void read_vec(const std::string& section, const std::string& key, Vec3& out) const {
        if (!raw(section, key)) return;
        const auto xs = list(section, key);
        if (xs.size() != 3) throw ConfigError(section + "." + key, "expected three numbers");
        out = {xs[0], xs[1], xs[2]};
    }

private:
    const ptree& tree_;
};

inline void check_unknown_keys(const ptree& tree) {
    static const std::map<std::string, std::vector<std::string>> known{
        {"experiment", {"name", "output", "cases"}},
        {"channel",
         {"diffusion_t", "diffusion_u", "stokes_radius_nm", "drift_um_s", "relay_um", "relay_radius_um",
          "destination_um", "destination_radius_um"}},
        {"pulse", {"family", "rate", "sinc_offset", "subslots", "budget", "energy_fJ", "molecules"}},
        {"energy", {"e_am_zJ", "e_sy_zJ", "e_ph_zJ", "e_e_zJ", "n_aa", "r_mm_nm", "r_unit_nm"}},
        {"reception", {"isi_length", "pi1", "noise_mean", "noise_variance", "relay_prior", "t_s_ms"}},
        {"sweep", {"axis", "values", "from", "to", "points"}},
        {"optimizer",
         {"epsilon", "t_min_ms", "t_max_ms", "feasibility_samples", "level_upper_init", "max_iterations",
          "scan_points", "grid_points"}},
        {"oracles", {"mc", "mc_bits", "seed", "streams", "threads"}},
        {"validate",
         {"presence_points", "presence_trials", "moment_instances", "moment_trials", "ber_bits", "corruption"}},
    };
    for (const auto& [section, body] : tree) {
        if (section.rfind("case:", 0) == 0) continue;
        const auto it = known.find(section);
        if (it == known.end()) throw ConfigError(section, "unknown section");
        for (const auto& [key, value] : body) {
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                throw ConfigError(section + "." + key, "unknown key");
        }
    }
}

inline ScenarioSpec parse_scenario(const ConfigReader& r) {
    ScenarioSpec s;
    r.read("channel", "diffusion_t", s.diffusion_t);
    r.read("channel", "diffusion_u", s.diffusion_u);
    r.read("channel", "stokes_radius_nm", s.stokes_radius_nm);
    r.read_vec("channel", "drift_um_s", s.drift_um_s);
    r.read_vec("channel", "relay_um", s.relay_um);
    r.read("channel", "relay_radius_um", s.relay_radius_um);
    if (r.raw("channel", "destination_um")) {
        Vec3 d;
        r.read_vec("channel", "destination_um", d);
        s.destination_um = d;
    }
    r.read("channel", "destination_radius_um", s.destination_radius_um);
    if (!(s.diffusion_t > 0.0)) throw ConfigError("channel.diffusion_t", "must be positive");
    if (!(s.diffusion_u > 0.0)) throw ConfigError("channel.diffusion_u", "must be positive");
    if (!(s.relay_radius_um > 0.0)) throw ConfigError("channel.relay_radius_um", "must be positive");
    if (!(s.destination_radius_um > 0.0)) throw ConfigError("channel.destination_radius_um", "must be positive");

    if (const auto fam = r.raw("pulse", "family")) {
        try {
            s.family.kind = parse_pulse_kind(*fam);
        } catch (const DomainError& e) {
            throw ConfigError("pulse.family", e.what());
        }
    }
    r.read("pulse", "rate", s.family.rate);
    r.read("pulse", "sinc_offset", s.family.sinc_offset);
    r.read("pulse", "subslots", s.subslots);
    if (s.subslots < 1) throw ConfigError("pulse.subslots", "must be >= 1");
    if (!(s.family.rate >= 0.0 && std::isfinite(s.family.rate))) throw ConfigError("pulse.rate", "must be finite, >= 0");
    if (const auto b = r.raw("pulse", "budget")) {
        if (*b == "energy") s.budget = BudgetMode::energy;
        else if (*b == "molecules") s.budget = BudgetMode::molecules;
        else throw ConfigError("pulse.budget", "expected 'energy' or 'molecules'");
    }
    r.read("pulse", "energy_fJ", s.energy_fJ);
    r.read("pulse", "molecules", s.molecules);
    if (s.budget == BudgetMode::energy && !(s.energy_fJ > 0.0)) throw ConfigError("pulse.energy_fJ", "must be positive");
    if (s.molecules < 0) throw ConfigError("pulse.molecules", "must be >= 0");

    double zj = 0;
    if (r.raw("energy", "e_am_zJ")) { r.read("energy", "e_am_zJ", zj); s.energy.e_am = zj * kZeptojoule; }
    if (r.raw("energy", "e_sy_zJ")) { r.read("energy", "e_sy_zJ", zj); s.energy.e_sy = zj * kZeptojoule; }
    if (r.raw("energy", "e_ph_zJ")) { r.read("energy", "e_ph_zJ", zj); s.energy.e_ph = zj * kZeptojoule; }
    if (r.raw("energy", "e_e_zJ")) { r.read("energy", "e_e_zJ", zj); s.energy.e_e = zj * kZeptojoule; }
    r.read("energy", "n_aa", s.energy.n_aa);
    if (r.raw("energy", "r_mm_nm")) { r.read("energy", "r_mm_nm", zj); s.energy.r_mm = zj * kNanometer; }
    r.read("energy", "r_unit_nm", s.energy.r_unit_nm);
    try {
        s.energy.validate();
    } catch (const DomainError& e) {
        throw ConfigError("energy", e.what());
    }

    r.read("reception", "isi_length", s.isi_length);
    if (s.isi_length < 0 || s.isi_length > kMaxIsiLength) throw ConfigError("reception.isi_length", "must lie in [0, 30]");
    r.read("reception", "pi1", s.priors.pi1);
    if (!(s.priors.pi1 >= 0.0 && s.priors.pi1 <= 1.0)) throw ConfigError("reception.pi1", "must lie in [0, 1]");
    r.read("reception", "noise_mean", s.relay_noise.mean);
    r.read("reception", "noise_variance", s.relay_noise.variance);
    if (!(s.relay_noise.mean >= 0.0)) throw ConfigError("reception.noise_mean", "must be >= 0");
    if (!(s.relay_noise.variance >= 0.0)) throw ConfigError("reception.noise_variance", "must be >= 0");
    s.destination_noise = s.relay_noise;
    if (const auto m = r.raw("reception", "relay_prior")) {
        if (*m == "source") s.relay_prior = RelayPriorMode::source;
        else if (*m == "exact") s.relay_prior = RelayPriorMode::exact;
        else throw ConfigError("reception.relay_prior", "expected 'source' or 'exact'");
    }
    r.read("reception", "t_s_ms", s.t_s_ms);
    if (!(s.t_s_ms > 0.0)) throw ConfigError("reception.t_s_ms", "must be positive");
    return s;
}

inline void warn_ranges(const ScenarioSpec& s, const std::string& where, std::vector<std::string>& warnings) {
    auto warn = [&](const std::string& what) { warnings.push_back(where + what); };
    for (double v : {s.drift_um_s.x, s.drift_um_s.y, s.drift_um_s.z})
        if (v < 1.0 || v > 100.0) warn("drift component " + std::to_string(v) + " um/s outside [1, 100]");
    const Vec3 d = s.destination();
    for (double v : {d.x, d.y, d.z})
        if (v < 20.0 || v > 200.0) warn("destination coordinate " + std::to_string(v) + " um outside [20, 200]");
    if (s.t_s_ms < 1.0 || s.t_s_ms > 16.0) warn("t_s " + std::to_string(s.t_s_ms) + " ms outside [1, 16]");
    if (s.isi_length < 1) warn("ISI length below 1");
    if (s.relay_radius_um != 50.0 || s.destination_radius_um != 50.0) warn("receiver radius differs from 50 um");
    if (s.subslots != 10) warn("sub-slot count differs from 10");
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
    using detail::ptree;
    ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("", std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    detail::check_unknown_keys(tree);
    const detail::ConfigReader r(tree);

    ExperimentConfig cfg;
    r.read("experiment", "name", cfg.name);
    r.read("experiment", "output", cfg.output);
    cfg.scenario = detail::parse_scenario(r);
    detail::warn_ranges(cfg.scenario, "", cfg.warnings);

    if (const auto axis = r.raw("sweep", "axis")) {
        SweepSpec sw;
        sw.axis = parse_sweep_axis(*axis);
        sw.values = r.list("sweep", "values");
        if (sw.values.empty()) {
            double from = 0, to = 0;
            int points = 0;
            if (!r.raw("sweep", "from") || !r.raw("sweep", "to") || !r.raw("sweep", "points"))
                throw ConfigError("sweep.values", "give either 'values' or 'from', 'to' and 'points'");
            r.read("sweep", "from", from);
            r.read("sweep", "to", to);
            r.read("sweep", "points", points);
            if (points < 1) throw ConfigError("sweep.points", "must be >= 1");
            for (int k = 0; k < points; ++k)
                sw.values.push_back(points == 1 ? from : from + (to - from) * k / (points - 1));
        }
        for (double v : sw.values) {
            if (!std::isfinite(v)) throw ConfigError("sweep.values", "non-finite value");
            if ((sw.axis == SweepAxis::t_s || sw.axis == SweepAxis::energy_budget) && !(v > 0.0))
                throw ConfigError("sweep.values", "values must be positive for this axis");
            if (sw.axis == SweepAxis::J && (v < 0 || v > kMaxIsiLength || v != std::round(v)))
                throw ConfigError("sweep.values", "J values must be integers in [0, 30]");
        }
        cfg.sweep = sw;
    } else if (tree.get_child_optional("sweep")) {
        throw ConfigError("sweep.axis", "missing");
    }

    auto& o = cfg.optimizer;
    r.read("optimizer", "epsilon", o.epsilon);
    if (r.raw("optimizer", "t_min_ms")) { r.read("optimizer", "t_min_ms", o.t_min); o.t_min *= kMillisecond; }
    if (r.raw("optimizer", "t_max_ms")) { r.read("optimizer", "t_max_ms", o.t_max); o.t_max *= kMillisecond; }
    r.read("optimizer", "feasibility_samples", o.feasibility_samples);
    r.read("optimizer", "level_upper_init", o.level_upper_init);
    r.read("optimizer", "max_iterations", o.max_iterations);
    r.read("optimizer", "scan_points", cfg.scan_points);
    r.read("optimizer", "grid_points", cfg.grid_points);
    try {
        o.validate();
    } catch (const DomainError& e) {
        throw ConfigError("optimizer", e.what());
    }
    if (cfg.scan_points < 2) throw ConfigError("optimizer.scan_points", "must be >= 2");
    if (cfg.grid_points < 2) throw ConfigError("optimizer.grid_points", "must be >= 2");

    // Each case section holds "section.key = value" overrides of the base config.
    if (const auto names = r.raw("experiment", "cases")) {
        std::istringstream in(*names);
        std::string name;
        while (in >> name) {
            const auto body = tree.get_child_optional(ptree::path_type("case:" + name, '/'));
            if (!body) throw ConfigError("experiment.cases", "no section [case:" + name + "]");
            ptree merged = tree;
            for (const auto& [key, value] : *body) {
                const auto dot = key.find('.');
                if (dot == std::string::npos) throw ConfigError("case:" + name + "." + key, "expected section.key");
                merged.put(detail::key_path(key.substr(0, dot), key.substr(dot + 1)), value.data());
            }
            try {
                detail::check_unknown_keys(merged);
                cfg.cases.push_back({name, detail::parse_scenario(detail::ConfigReader(merged))});
            } catch (const ConfigError& e) {
                throw ConfigError("case:" + name + "." + e.field(), e.message());
            }
            detail::warn_ranges(cfg.cases.back().scenario, "case " + name + ": ", cfg.warnings);
        }
    }

    r.read("oracles", "mc", cfg.oracles.mc);
    r.read("oracles", "mc_bits", cfg.oracles.mc_bits);
    r.read("oracles", "seed", cfg.oracles.rng.seed);
    r.read("oracles", "streams", cfg.oracles.rng.streams);
    r.read("oracles", "threads", cfg.oracles.rng.threads);
    if (cfg.oracles.mc_bits < 1000) throw ConfigError("oracles.mc_bits", "must be >= 1000");
    if (cfg.oracles.rng.streams < 1) throw ConfigError("oracles.streams", "must be >= 1");
    if (cfg.oracles.rng.threads < 1) throw ConfigError("oracles.threads", "must be >= 1");

    auto& v = cfg.validate;
    r.read("validate", "presence_points", v.presence_points);
    r.read("validate", "presence_trials", v.presence_trials);
    r.read("validate", "moment_instances", v.moment_instances);
    r.read("validate", "moment_trials", v.moment_trials);
    r.read("validate", "ber_bits", v.ber_bits);
    r.read("validate", "corruption", v.corruption);
    if (v.presence_points < 0) throw ConfigError("validate.presence_points", "must be >= 0");
    if (v.presence_trials < 1) throw ConfigError("validate.presence_trials", "must be >= 1");
    if (v.moment_instances < 0) throw ConfigError("validate.moment_instances", "must be >= 0");
    if (v.moment_trials < 10'000) throw ConfigError("validate.moment_trials", "must be >= 1e4");
    if (v.ber_bits < 0 || (v.ber_bits > 0 && v.ber_bits < 1000)) throw ConfigError("validate.ber_bits", "must be 0 or >= 1000");
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config '" + path + "'");
    return parse_config(in);
}

// ---------------------------------------------------------------------------------------------
// CSV helpers

inline std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

// Runs fn(k) for k in [0, n) on up to `threads` workers.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (int k = 0; k < n; ++k) fn(k);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < std::min(threads, n); ++w)
        pool.emplace_back([&] {
            for (int k = next++; k < n; k = next++) fn(k);
        });
}

// ---------------------------------------------------------------------------------------------
// Sweeps

struct SweepRow {
    double axis_value = 0.0;
    double ber_direct = 0.5;
    double ber_relay = 0.5;
    double ber_relay_chain = 0.5;
    double energy_fJ = 0.0;
    std::int64_t molecules = 0;
    double objective = 0.0;  ///< bits/s
    int clamped = 0;         ///< clamped increments over the three tables
    std::optional<McEstimate> mc_relay;
    std::string status = "ok";
};

/// Analytic evaluation (and optional link simulation) of one scenario.
inline SweepRow evaluate_row(const ScenarioSpec& spec, double axis_value, const OracleToggles& oracles,
                             std::uint64_t row_seed) {
    SweepRow row;
    row.axis_value = axis_value;
    LinkScenario sc;
    try {
        sc = spec.link();
    } catch (const InfeasibleBudgetError&) {
        row.status = "infeasible_budget";
        return row;
    }
    const double t_s = spec.t_s_ms * kMillisecond;
    const LinkEvaluation ev = evaluate_link(sc, t_s, true);
    row.ber_direct = ev.pe_direct;
    row.ber_relay = ev.pe_relay;
    row.ber_relay_chain = ev.pe_relay_chain;
    row.energy_fJ = total_energy(sc.source_pulse, spec.energy) / kFemtojoule;
    row.molecules = sc.source_pulse.total();
    row.objective = ev.objective;
    row.clamped = ev.table_sr.clamp_count() + ev.table_rd.clamp_count() + ev.table_sd.clamp_count();
    if (oracles.mc) {
        RngConfig rng = oracles.rng;
        rng.seed = row_seed;
        rng.threads = 1;
        row.mc_relay = mc_link_ber(sc, t_s, oracles.mc_bits, rng);
    }
    return row;
}

inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
    if (!cfg.sweep) throw ConfigError("sweep", "config has no [sweep] section");
    const auto& values = cfg.sweep->values;
    std::vector<SweepRow> rows(values.size());
    parallel_for(static_cast<int>(values.size()), cfg.oracles.rng.threads, [&](int k) {
        ScenarioSpec spec = cfg.scenario;
        spec.apply(cfg.sweep->axis, values[static_cast<std::size_t>(k)]);
        rows[static_cast<std::size_t>(k)] = evaluate_row(spec, values[static_cast<std::size_t>(k)], cfg.oracles,
                                                         splitmix64(cfg.oracles.rng.seed + static_cast<std::uint64_t>(k)));
    });
    return rows;
}

inline std::string sweep_csv(const ExperimentConfig& cfg, const std::vector<SweepRow>& rows) {
    std::string out = axis_column(cfg.sweep->axis) +
                      ",ber_direct,ber_relay,half_minus_ber_relay,ber_relay_chain,energy_fJ,molecules,objective_bit_s,clamped_increments";
    if (cfg.oracles.mc) out += ",mc_ber_relay,mc_ber_relay_se,mc_bits";
    out += ",status\n";
    for (const auto& r : rows) {
        out += csv_number(r.axis_value) + "," + csv_number(r.ber_direct) + "," + csv_number(r.ber_relay) + "," +
               csv_number(0.5 - r.ber_relay) + "," + csv_number(r.ber_relay_chain) + "," + csv_number(r.energy_fJ) + "," + std::to_string(r.molecules) +
               "," + csv_number(r.objective) + "," + std::to_string(r.clamped);
        if (cfg.oracles.mc) {
            if (r.mc_relay)
                out += "," + csv_number(r.mc_relay->value) + "," + csv_number(r.mc_relay->std_error) + "," +
                       std::to_string(r.mc_relay->trials);
            else
                out += ",,,";
        }
        out += "," + r.status + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Optimization

struct OptimizeResult {
    std::string name;
    Optimum optimum;
    double grid_t = 0.0;   ///< dense-grid argmax, s
    double grid_f = 0.0;   ///< dense-grid max, bits/s
    SignScan scan;
};

inline std::vector<double> linear_grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = k == n - 1 ? hi : lo + (hi - lo) * k / (n - 1);
    return g;
}

/// Level-set bisection, dense-grid reference and derivative sign scan for one scenario.
inline OptimizeResult optimize_scenario(const std::string& name, const ScenarioSpec& spec,
                                        const OptimizerConfig& oc, int grid_points, int scan_points) {
    OptimizeResult res;
    res.name = name;
    const Objective f = make_objective(spec.link());
    res.optimum = bisection_optimize(f, oc);
    for (const double t : linear_grid(oc.t_min, oc.t_max, grid_points)) {
        const double v = f(t);
        if (v > res.grid_f) {
            res.grid_f = v;
            res.grid_t = t;
        }
    }
    // Keep the central differences inside the search interval.
    const double pad = 1e-5 * oc.t_max;
    res.scan = derivative_sign_scan(f, linear_grid(oc.t_min + pad, oc.t_max - pad, scan_points));
    return res;
}

inline std::vector<OptimizeResult> run_optimize(const ExperimentConfig& cfg) {
    std::vector<CaseSpec> cases = cfg.cases;
    if (cases.empty()) cases.push_back({cfg.name, cfg.scenario});
    std::vector<OptimizeResult> out(cases.size());
    parallel_for(static_cast<int>(cases.size()), cfg.oracles.rng.threads, [&](int k) {
        const auto& c = cases[static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(k)] = optimize_scenario(c.name, c.scenario, cfg.optimizer, cfg.grid_points, cfg.scan_points);
    });
    return out;
}

inline std::string optimum_csv(const std::vector<OptimizeResult>& results) {
    std::string out =
        "case,t_star_ms,f_star_bit_s,iterations,grid_t_ms,grid_f_bit_s,sign_changes,zero_signs,single_sign_change\n";
    for (const auto& r : results) {
        out += r.name + "," + csv_number(r.optimum.t_star / kMillisecond) + "," + csv_number(r.optimum.f_star) + "," +
               std::to_string(r.optimum.iterations) + "," + csv_number(r.grid_t / kMillisecond) + "," +
               csv_number(r.grid_f) + "," + std::to_string(r.scan.sign_changes) + "," +
               std::to_string(r.scan.zero_count) + "," + (r.scan.single_sign_change() ? "yes" : "no") + "\n";
    }
    return out;
}

inline std::string trace_csv(const std::vector<OptimizeResult>& results) {
    std::string out = "case,iteration,level_bit_s,lower_bit_s,upper_bit_s,feasible,witness_t_ms\n";
    for (const auto& r : results)
        for (const auto& s : r.optimum.trace)
            out += r.name + "," + std::to_string(s.iteration) + "," + csv_number(s.level) + "," + csv_number(s.lower) +
                   "," + csv_number(s.upper) + "," + (s.feasible ? "1" : "0") + "," +
                   csv_number(s.witness / kMillisecond) + "\n";
    return out;
}

// ---------------------------------------------------------------------------------------------
// Oracle suite

/// Presence grid, randomized moment instances, and link-simulator BER on every case (or the base
/// scenario) at its configured t_s.
inline OracleReport validate_oracles(const ExperimentConfig& cfg) {
    const auto& v = cfg.validate;
    OracleReport report;
    report.append(check_presence(presence_grid(v.presence_points), v.presence_trials, cfg.oracles.rng, {}, v.corruption));
    report.append(check_moments(random_moment_instances(v.moment_instances, cfg.oracles.rng.seed), v.moment_trials,
                                cfg.oracles.rng));
    if (v.ber_bits > 0) {
        std::vector<BerCase> cases;
        if (cfg.cases.empty())
            cases.push_back({cfg.name, cfg.scenario.link(), cfg.scenario.t_s_ms * kMillisecond});
        for (const auto& c : cfg.cases) cases.push_back({c.name, c.scenario.link(), c.scenario.t_s_ms * kMillisecond});
        report.append(check_ber(cases, v.ber_bits, cfg.oracles.rng));
    }
    return report;
}

}  // namespace mcvd
