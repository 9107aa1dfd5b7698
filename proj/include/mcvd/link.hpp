#pragma once

// Full source -> relay -> destination link and its analytic evaluation at one symbol duration.

#include <limits>

#include "mcvd/ber.hpp"
#include "mcvd/channel.hpp"
#include "mcvd/pulse.hpp"
#include "mcvd/reception.hpp"

namespace mcvd {

/// Which bit prior drives the interference statistics at the destination.
enum class RelayPriorMode {
    source,  ///< reuse the source prior pi1 (what the closed-form relay BER assumes)
    exact,   ///< Pr(relay sends 1) = pi1 Pr(detect|1) + pi0 Pr(detect|0)
};

struct LinkScenario {
    double diffusion_t = 4e-9;  ///< source molecules, m^2/s
    double diffusion_u = 4e-9;  ///< relay molecules, m^2/s
    Vec3 drift;                 ///< m/s
    SphereReceiver relay;       ///< relative to the source
    SphereReceiver destination; ///< relative to the source
    PulseShape source_pulse;
    PulseShape relay_pulse;
    int isi_length = 10;
    Priors priors;
    NoiseParams relay_noise;
    NoiseParams destination_noise;
    RelayPriorMode relay_prior_mode = RelayPriorMode::source;

    [[nodiscard]] ChannelParams source_to_relay() const { return {diffusion_t, drift, relay}; }
    [[nodiscard]] ChannelParams relay_to_destination() const {
        return second_hop_params(relay.center, destination.center, destination.radius, diffusion_u, drift);
    }
    [[nodiscard]] ChannelParams source_to_destination() const { return {diffusion_t, drift, destination}; }
};

struct LinkEvaluation {
    double t_s = 0.0;
    ArrivalTable table_sr;
    ArrivalTable table_rd;
    ArrivalTable table_sd;
    LinkStats stats_sr;
    LinkStats stats_rd;
    LinkStats stats_sd;
    Priors relay_priors;
    double pe_direct = 0.5;
    double pe_relay = 0.5;
    double pe_relay_chain = 0.5;  ///< diagnostic: exact chain through the detection probabilities
    double success = 0.0;
    double objective = 0.0;       ///< successfully received bits per second
};

/// Sets the MAP threshold; indistinguishable hypotheses get tau = +inf ("always decide 0").
inline void assign_threshold(LinkStats& stats, const Priors& priors) {
    try {
        stats.threshold = map_threshold(stats, priors);
    } catch (const NoThresholdError&) {
        stats.threshold = std::numeric_limits<double>::infinity();
    }
}

inline LinkEvaluation evaluate_link(const LinkScenario& sc, double t_s, bool include_direct = true) {
    LinkEvaluation ev;
    ev.t_s = t_s;
    const int subslots = sc.source_pulse.subslots();
    ev.table_sr = arrival_table(sc.source_to_relay(), t_s, subslots, sc.isi_length);
    ev.table_rd = arrival_table(sc.relay_to_destination(), t_s, sc.relay_pulse.subslots(), sc.isi_length);

    ev.stats_sr = link_stats(sc.source_pulse, ev.table_sr, sc.priors, sc.relay_noise);
    assign_threshold(ev.stats_sr, sc.priors);

    ev.relay_priors = sc.priors;
    if (sc.relay_prior_mode == RelayPriorMode::exact) {
        const auto [detect, false_alarm] = detection_probabilities(ev.stats_sr);
        ev.relay_priors.pi1 = sc.priors.pi1 * detect + sc.priors.pi0() * false_alarm;
    }
    ev.stats_rd = link_stats(sc.relay_pulse, ev.table_rd, ev.relay_priors, sc.destination_noise);
    assign_threshold(ev.stats_rd, ev.relay_priors);

    if (include_direct) {
        ev.table_sd = arrival_table(sc.source_to_destination(), t_s, subslots, sc.isi_length);
        ev.stats_sd = link_stats(sc.source_pulse, ev.table_sd, sc.priors, sc.destination_noise);
        assign_threshold(ev.stats_sd, sc.priors);
        ev.pe_direct = direct_ber(ev.stats_sd).p_e;
    }
    ev.pe_relay = relay_ber(ev.stats_sr, ev.stats_rd).p_e;
    ev.pe_relay_chain = relay_ber_exact_chain(ev.stats_sr, ev.stats_rd, sc.priors);
    ev.success = success_probability(ev.pe_relay);
    ev.objective = ev.success / t_s;
    return ev;
}

}  // namespace mcvd
