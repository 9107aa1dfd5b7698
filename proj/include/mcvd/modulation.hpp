#pragma once

// Non-uniform BCSK pulse construction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "mcvd/energy.hpp"
#include "mcvd/errors.hpp"
#include "mcvd/pulse.hpp"

namespace mcvd {

enum class PulseKind { uniform, exponential, sinc, cosine };

struct ShapeFamily {
    PulseKind kind = PulseKind::uniform;
    double rate = 0.5;         ///< exponential decay per sub-slot
    double sinc_offset = 0.5;  ///< keeps the first sinc sample off the removable singularity

    static ShapeFamily uniform() { return {PulseKind::uniform}; }
    static ShapeFamily exponential(double rate = 0.5) { return {PulseKind::exponential, rate}; }
    static ShapeFamily sinc() { return {PulseKind::sinc}; }
    static ShapeFamily cosine() { return {PulseKind::cosine}; }
};

inline std::string_view to_string(PulseKind k) {
    switch (k) {
        case PulseKind::uniform: return "uniform";
        case PulseKind::exponential: return "exponential";
        case PulseKind::sinc: return "sinc";
        case PulseKind::cosine: return "cosine";
    }
    return "?";
}

inline PulseKind parse_pulse_kind(std::string_view s) {
    if (s == "uniform") return PulseKind::uniform;
    if (s == "exponential") return PulseKind::exponential;
    if (s == "sinc") return PulseKind::sinc;
    if (s == "cosine") return PulseKind::cosine;
    throw DomainError("unknown pulse family '" + std::string(s) + "'");
}

/// Unnormalized release weights for each sub-slot.
inline std::vector<double> shape_weights(const ShapeFamily& family, int subslots) {
    if (subslots < 1) throw DomainError("shape_weights: need at least one sub-slot");
    if (!std::isfinite(family.rate) || family.rate < 0.0)
        throw DomainError("shape_weights: exponential rate must be finite and non-negative");
    std::vector<double> w(static_cast<std::size_t>(subslots));
    const double n = subslots;
    for (int i = 0; i < subslots; ++i) {
        double v = 1.0;
        switch (family.kind) {
            case PulseKind::uniform: v = 1.0; break;
            case PulseKind::exponential: v = std::exp(-family.rate * i); break;
            case PulseKind::sinc: {
                const double x = std::numbers::pi * (i + family.sinc_offset) / n;
                v = std::abs(x == 0.0 ? 1.0 : std::sin(x) / x);
                break;
            }
            case PulseKind::cosine: v = std::cos(std::numbers::pi * i / (2.0 * n)); break;
        }
        w[static_cast<std::size_t>(i)] = v;
    }
    return w;
}

/// Largest-remainder apportionment of `total` units proportionally to `weights`.
/// Ties in the remainder go to the lower index.
inline std::vector<std::int64_t> apportion(const std::vector<double>& weights, std::int64_t total) {
    if (total < 0) throw DomainError("apportion: negative total");
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(sum > 0.0)) throw DomainError("apportion: weights must have positive sum");

    const std::size_t n = weights.size();
    std::vector<std::int64_t> out(n);
    std::vector<double> frac(n);
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double quota = static_cast<double>(total) * weights[i] / sum;
        const double fl = std::floor(quota);
        out[i] = static_cast<std::int64_t>(fl);
        frac[i] = quota - fl;
        assigned += out[i];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    // Floating-point quotas can overshoot by a unit in pathological cases; walk it back.
    for (std::size_t k = 0; assigned > total; k = (k + 1) % n) {
        const std::size_t idx = order[n - 1 - k];
        if (out[idx] > 0) {
            --out[idx];
            --assigned;
        }
    }
    for (std::size_t k = 0; assigned < total; k = (k + 1) % n) {
        ++out[order[k]];
        ++assigned;
    }
    return out;
}

inline PulseShape make_pulse(const ShapeFamily& family, int subslots, std::int64_t total_molecules, double t_s) {
    if (total_molecules < 0) throw DomainError("make_pulse: negative molecule total");
    return PulseShape{apportion(shape_weights(family, subslots), total_molecules), t_s};
}

/// Largest pulse of `family` whose transmit energy fits within `budget` joules.
/// N* is the largest total with E(N*) <= budget.
inline PulseShape scale_to_energy(const ShapeFamily& family, int subslots, double t_s, double budget,
                                  const EnergyParams& energy) {
    energy.validate();
    auto cost = [&](std::int64_t n) { return total_energy(make_pulse(family, subslots, n, t_s), energy); };

    if (!(budget >= cost(1)))
        throw InfeasibleBudgetError("scale_to_energy: budget " + std::to_string(budget) +
                                    " J cannot pay for a single-molecule pulse");

    // E(N) is not monotone in N. Bracket N* by one occupied sub-slot (below) and an even split (above).
    const auto I = static_cast<std::int64_t>(subslots);
    auto lower = [&](std::int64_t n) { return subslot_energy(n, energy).total; };
    auto upper = [&](std::int64_t n) { return static_cast<double>(I) * subslot_energy((n + I - 1) / I, energy).total; };
    auto last_within = [&](auto&& bound) {
        std::int64_t lo = 0, hi = 1;
        while (bound(hi) <= budget) hi *= 2;
        while (hi - lo > 1) {
            const std::int64_t mid = lo + (hi - lo) / 2;
            (bound(mid) <= budget ? lo : hi) = mid;
        }
        return lo;
    };
    const std::int64_t floor_n = std::max<std::int64_t>(last_within(upper), 1);
    std::int64_t lo = last_within(lower);
    while (lo > floor_n && cost(lo) > budget) --lo;
    return make_pulse(family, subslots, lo, t_s);
}

}  // namespace mcvd
