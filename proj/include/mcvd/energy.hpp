#pragma once

// Exocytosis energy model with a vesicle sized to each sub-slot packet.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "mcvd/errors.hpp"
#include "mcvd/pulse.hpp"

namespace mcvd {

inline constexpr double kZeptojoule = 1e-21;
inline constexpr double kFemtojoule = 1e-15;
inline constexpr double kNanometer = 1e-9;

struct EnergyParams {
    double e_am = 202.88 * kZeptojoule;  ///< per amino-acid bond, J
    double e_sy = 415.0 * kZeptojoule;   ///< vesicle synthesis, J per nm^2 of membrane
    double e_ph = 83.0 * kZeptojoule;    ///< phosphorylation, J per transport step
    double e_e = 830.0 * kZeptojoule;    ///< vesicle fusion/release, J
    int n_aa = 51;                       ///< amino acids per messenger protein
    double r_mm = 2.5 * kNanometer;      ///< messenger molecule radius, m
    double r_unit_nm = 10'000.0;         ///< transmitter radius in nanometers

    void validate() const {
        if (!(e_am > 0 && e_sy > 0 && e_ph > 0 && e_e > 0 && r_mm > 0 && r_unit_nm > 0))
            throw DomainError("energy: all cost and size parameters must be positive");
        if (n_aa < 2) throw DomainError("energy: a protein needs at least two amino acids");
    }
};

struct EnergyBreakdown {
    double synthesis = 0.0;
    double vesicle = 0.0;
    double carry = 0.0;
    double release = 0.0;
    double total = 0.0;
};

/// Radius (m) of a vesicle holding `molecules` messengers of radius r_mm.
inline double vesicle_radius(std::int64_t molecules, double r_mm) {
    if (molecules < 1) throw DomainError("vesicle_radius: vesicle must hold at least one molecule");
    if (!(r_mm > 0.0)) throw DomainError("vesicle_radius: molecule radius must be positive");
    return std::numbers::sqrt3 * r_mm * std::cbrt(static_cast<double>(molecules));
}

/// Molecules that fit in a vesicle of radius r_v; inverse of vesicle_radius().
inline double vesicle_capacity(double r_v, double r_mm) {
    if (!(r_v > 0.0) || !(r_mm > 0.0)) throw DomainError("vesicle_capacity: radii must be positive");
    const double ratio = r_v / (r_mm * std::numbers::sqrt3);
    return ratio * ratio * ratio;
}

/// Cost of one transport step sequence; r_unit is taken in nanometers.
inline double carry_energy(const EnergyParams& params) {
    return params.e_ph * std::ceil((params.r_unit_nm / 2.0) / 8.0);
}

/// Energy to synthesize, package, carry and release one sub-slot packet. Empty sub-slots cost nothing.
inline EnergyBreakdown subslot_energy(std::int64_t molecules, const EnergyParams& params) {
    if (molecules < 0) throw DomainError("subslot_energy: negative molecule count");
    params.validate();
    EnergyBreakdown e;
    if (molecules == 0) return e;

    e.synthesis = params.e_am * (params.n_aa - 1) * static_cast<double>(molecules);
    const double r_v_nm = vesicle_radius(molecules, params.r_mm) / kNanometer;
    e.vesicle = params.e_sy * 4.0 * std::numbers::pi * r_v_nm * r_v_nm;
    e.carry = carry_energy(params);
    e.release = params.e_e;
    e.total = e.synthesis + e.vesicle + e.carry + e.release;
    return e;
}

/// Energy (J) to transmit one bit "1" with this pulse.
inline double total_energy(const PulseShape& pulse, const EnergyParams& params) {
    pulse.validate();
    double sum = 0.0;
    for (const auto g : pulse.counts) sum += subslot_energy(g, params).total;
    return sum;
}

}  // namespace mcvd
