#pragma once

// Closed-form bit error probabilities for direct and decode-and-forward relay links.

#include <algorithm>
#include <cmath>
#include <string_view>

#include "mcvd/errors.hpp"
#include "mcvd/reception.hpp"

namespace mcvd {

enum class LinkMode { direct, relay };

struct BerResult {
    double p_e = 0.5;
    LinkMode mode = LinkMode::direct;
};

inline std::string_view to_string(LinkMode m) { return m == LinkMode::direct ? "direct" : "relay"; }

namespace detail {

// erf((tau - mu1)/sqrt(2 var1)) - erf((tau - mu0)/sqrt(2 var0)); lies in [-2, 2].
inline double decision_bracket(const LinkStats& s) {
    const double tau = s.tau();
    return std::erf((tau - s.mu1) / std::sqrt(2.0 * s.var1)) - std::erf((tau - s.mu0) / std::sqrt(2.0 * s.var0));
}

}  // namespace detail

/// Equiprobable-bit error probability of a single threshold-detected hop.
inline BerResult direct_ber(const LinkStats& sd) {
    const double pe = 0.5 + 0.25 * detail::decision_bracket(sd);
    return {std::clamp(pe, 0.0, 1.0), LinkMode::direct};
}

/// End-to-end error probability of source -> relay -> destination with equiprobable bits.
inline BerResult relay_ber(const LinkStats& sr, const LinkStats& rd) {
    const double first = detail::decision_bracket(sr);
    const double second = -detail::decision_bracket(rd);
    const double pe = 0.5 + 0.125 * first * second;
    return {std::clamp(pe, 0.0, 1.0), LinkMode::relay};
}

/// Relay error probability chained through the per-hop detection probabilities with
/// arbitrary priors. Equals relay_ber() when pi1 = 1/2; kept as a diagnostic.
inline double relay_ber_exact_chain(const LinkStats& sr, const LinkStats& rd, const Priors& priors) {
    const auto [a, b] = detection_probabilities(sr);
    const auto [c, d] = detection_probabilities(rd);
    const double miss = a * (1.0 - c) + (1.0 - a) * (1.0 - d);
    const double false_alarm = b * c + (1.0 - b) * d;
    return priors.pi1 * miss + priors.pi0() * false_alarm;
}

/// Probability that a symbol of `bits_per_symbol` bits is received correctly. Error rates
/// above 1/2 are relabeled to 1 - p_e (a detector that is wrong more often than not is
/// inverted).
inline double success_probability(double p_e, int bits_per_symbol = 1) {
    if (!(p_e >= 0.0 && p_e <= 1.0)) throw DomainError("success_probability: p_e must lie in [0, 1]");
    if (bits_per_symbol < 1) throw DomainError("success_probability: bits_per_symbol must be >= 1");
    const double p = std::min(p_e, 1.0 - p_e);
    return std::pow(1.0 - 2.0 * p, bits_per_symbol);
}

}  // namespace mcvd
