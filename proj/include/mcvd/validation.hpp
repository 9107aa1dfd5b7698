#pragma once

// Oracle suite: analytic pipeline against quadrature, particle sampling, binomial-mixture
// moments and the bit-level link simulator. Failures are report content, never exceptions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "mcvd/channel.hpp"
#include "mcvd/link.hpp"
#include "mcvd/montecarlo.hpp"
#include "mcvd/reception.hpp"
#include "mcvd/rng.hpp"

namespace mcvd {

struct OracleCheck {
    std::string suite;
    std::string label;
    double analytic = 0.0;
    double reference = 0.0;
    double deviation = 0.0;   ///< in the units of `tolerance`
    double tolerance = 0.0;
    bool applicable = true;   ///< false: recorded but outside the check's domain
    bool passed = true;
};

struct OracleReport {
    std::vector<OracleCheck> checks;

    [[nodiscard]] bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.passed; });
    }
    [[nodiscard]] int failures() const {
        return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const OracleCheck& c) { return !c.passed; }));
    }
    void append(const OracleReport& other) { checks.insert(checks.end(), other.checks.begin(), other.checks.end()); }

    [[nodiscard]] std::string to_csv() const {
        std::string out = "suite,label,analytic,reference,deviation,tolerance,status\n";
        char buf[256];
        for (const auto& c : checks) {
            std::snprintf(buf, sizeof buf, ",%.8e,%.8e,%.8e,%.8e,%s\n", c.analytic, c.reference, c.deviation,
                          c.tolerance, !c.applicable ? "skip" : (c.passed ? "pass" : "FAIL"));
            out += c.suite + "," + c.label + buf;
        }
        return out;
    }
};

// ---------------------------------------------------------------------------------------------
// Presence probability

struct PresencePoint {
    ChannelParams params;
    double t = 0.0;
};

/// Radical inverse of n in the given base (Halton sequence coordinate).
inline double radical_inverse(std::uint64_t n, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double f = inv, r = 0.0;
    while (n > 0) {
        r += f * static_cast<double>(n % base);
        n /= base;
        f *= inv;
    }
    return r;
}

/// Low-discrepancy grid over the nominal parameter ranges: receiver distance 20-200 um in the
/// positive octant, drift components 1-100 um/s, t 1-18 ms, radius 50 um, D = 4e-9 m^2/s.
inline std::vector<PresencePoint> presence_grid(int points) {
    constexpr std::uint64_t kBases[] = {2, 3, 5, 7, 11, 13, 17};
    std::vector<PresencePoint> grid;
    for (int k = 1; k <= points; ++k) {
        double u[7];
        for (int d = 0; d < 7; ++d) u[d] = radical_inverse(static_cast<std::uint64_t>(k), kBases[d]);
        const double dist = (20.0 + 180.0 * u[0]) * 1e-6;
        const double cos_polar = u[1];
        const double azimuth = 0.5 * std::numbers::pi * u[2];
        const double sin_polar = std::sqrt(1.0 - cos_polar * cos_polar);
        const Vec3 center{dist * sin_polar * std::cos(azimuth), dist * sin_polar * std::sin(azimuth), dist * cos_polar};
        const Vec3 drift{(1.0 + 99.0 * u[3]) * 1e-6, (1.0 + 99.0 * u[4]) * 1e-6, (1.0 + 99.0 * u[5]) * 1e-6};
        const double t = (1.0 + 17.0 * u[6]) * 1e-3;
        grid.push_back({{4e-9, drift, {center, 50e-6}}, t});
    }
    return grid;
}

struct PresenceTolerance {
    double relative = 0.05;     ///< analytic vs quadrature
    double floor = 1e-4;        ///< relative check only above this probability
    double sigmas = 3.0;        ///< particle estimate vs quadrature
};

/// Two checks per point. `corruption` scales the analytic value (negative-control hook).
inline OracleReport check_presence(const std::vector<PresencePoint>& grid, std::int64_t trials, const RngConfig& rng,
                                   const PresenceTolerance& tol = {}, double corruption = 1.0) {
    OracleReport report;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto& pt = grid[k];
        const double analytic = corruption * presence_probability(pt.params, pt.t);
        const double quad = quadrature_presence_probability(pt.params, pt.t);
        const std::string label = "point" + std::to_string(k);

        OracleCheck rel{"presence_quadrature", label, analytic, quad};
        rel.tolerance = tol.relative;
        rel.applicable = quad > tol.floor;
        rel.deviation = quad > 0.0 ? std::abs(analytic - quad) / quad : std::abs(analytic - quad);
        rel.passed = !rel.applicable || rel.deviation <= tol.relative;
        report.checks.push_back(rel);

        RngConfig point_rng = rng;
        point_rng.seed = splitmix64(rng.seed + k);
        const McEstimate mc = mc_presence_probability(pt.params, pt.t, trials, point_rng);
        const double se = std::max(std::sqrt(quad * (1.0 - quad) / static_cast<double>(trials)),
                                   1.0 / static_cast<double>(trials));
        OracleCheck part{"presence_particles", label, mc.value, quad};
        part.tolerance = tol.sigmas;
        part.deviation = std::abs(mc.value - quad) / se;
        part.passed = part.deviation <= tol.sigmas;
        report.checks.push_back(part);
    }
    return report;
}

// ---------------------------------------------------------------------------------------------
// Count moments

struct MomentInstance {
    PulseShape pulse;
    ArrivalTable table;
    Priors priors;
    NoiseParams noise;
};

/// Random small instances: I in [1, 4], J in [1, 3], g(i) in [0, 200], hand-set P tables.
inline std::vector<MomentInstance> random_moment_instances(int count, std::uint64_t seed) {
    StreamRng g(seed, 0xA11CE);
    auto uniform_int = [&](int lo, int hi) { return lo + static_cast<int>(g.uniform() * (hi - lo + 1)); };
    std::vector<MomentInstance> out;
    for (int k = 0; k < count; ++k) {
        const int subslots = uniform_int(1, 4);
        const int memory = uniform_int(1, 3);
        MomentInstance inst;
        for (int i = 0; i < subslots; ++i) inst.pulse.counts.push_back(uniform_int(0, 200));
        if (inst.pulse.total() == 0) inst.pulse.counts[0] = 100;
        inst.pulse.slot_duration = 1.0;
        inst.table = ArrivalTable(subslots, memory);
        for (int j = 1; j <= memory + 1; ++j)
            for (int i = 0; i < subslots; ++i) inst.table.set_presence(j, i, 0.6 * g.uniform());
        inst.table.derive_increments();
        inst.priors.pi1 = 0.3 + 0.4 * g.uniform();
        inst.noise = {100.0, 100.0};
        out.push_back(std::move(inst));
    }
    return out;
}

/// Four moment checks (3 standard errors) plus the exact ISI-component identity per instance.
inline OracleReport check_moments(const std::vector<MomentInstance>& instances, std::int64_t trials,
                                  const RngConfig& rng, double sigmas = 3.0) {
    OracleReport report;
    for (std::size_t k = 0; k < instances.size(); ++k) {
        const auto& in = instances[k];
        const LinkStats s = link_stats(in.pulse, in.table, in.priors, in.noise);
        RngConfig inst_rng = rng;
        inst_rng.seed = splitmix64(rng.seed ^ (0x9E37ULL + k));
        const CountMoments mc = mc_count_moments(in.pulse, in.table, in.priors, in.noise, trials, inst_rng);
        const std::string label = "instance" + std::to_string(k);
        auto add = [&](const char* what, double analytic, const McEstimate& est) {
            OracleCheck c{"moments", label + "_" + what, analytic, est.value};
            c.tolerance = sigmas;
            c.deviation = est.std_error > 0.0 ? std::abs(est.value - analytic) / est.std_error
                                               : (est.value == analytic ? 0.0 : INFINITY);
            c.passed = c.deviation <= sigmas;
            report.checks.push_back(c);
        };
        add("mu0", s.mu0, mc.mean0);
        add("var0", s.var0, mc.var0);
        add("mu1", s.mu1, mc.mean1);
        add("var1", s.var1, mc.var1);

        const Moments isi = isi_moments(in.pulse, in.table, in.priors);
        OracleCheck exact{"isi_identity", label, s.isi_mean + s.isi_variance, isi.mean + isi.variance};
        exact.deviation = std::abs(exact.analytic - exact.reference);
        exact.passed = s.isi_mean == isi.mean && s.isi_variance == isi.variance;
        report.checks.push_back(exact);
    }
    return report;
}

// ---------------------------------------------------------------------------------------------
// End-to-end BER

struct BerCase {
    std::string label;
    LinkScenario scenario;
    double t_s = 0.0;
};

struct BerTolerance {
    double relative = 0.10;
    double min_pe = 1e-3;   ///< cases below this analytic BER are recorded but not judged
};

inline OracleReport check_ber(const std::vector<BerCase>& cases, std::int64_t bits, const RngConfig& rng,
                              const BerTolerance& tol = {}) {
    OracleReport report;
    for (std::size_t k = 0; k < cases.size(); ++k) {
        const auto& bc = cases[k];
        const LinkEvaluation ev = evaluate_link(bc.scenario, bc.t_s, false);
        RngConfig case_rng = rng;
        case_rng.seed = splitmix64(rng.seed + 0x5EEDULL * (k + 1));
        const McEstimate mc = mc_link_ber(bc.scenario, bc.t_s, bits, case_rng);
        OracleCheck c{"relay_ber", bc.label, ev.pe_relay, mc.value};
        c.tolerance = tol.relative;
        c.deviation = ev.pe_relay > 0.0 ? std::abs(mc.value - ev.pe_relay) / ev.pe_relay : std::abs(mc.value);
        c.applicable = ev.pe_relay >= tol.min_pe;
        c.passed = !c.applicable || c.deviation <= tol.relative;
        report.checks.push_back(c);
    }
    return report;
}

}  // namespace mcvd
