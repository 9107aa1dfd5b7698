#pragma once

// Diffusion-with-drift channel: point release at the origin, passive spherical receiver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "mcvd/errors.hpp"

namespace mcvd {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend constexpr Vec3 operator+(Vec3 a, Vec3 b) noexcept { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 b) noexcept { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator*(double s, Vec3 a) noexcept { return {s * a.x, s * a.y, s * a.z}; }
    friend constexpr bool operator==(Vec3, Vec3) = default;

    [[nodiscard]] constexpr double dot(Vec3 o) const noexcept { return x * o.x + y * o.y + z * o.z; }
    [[nodiscard]] double norm() const noexcept { return std::sqrt(dot(*this)); }
    [[nodiscard]] bool finite() const noexcept {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
};

struct SphereReceiver {
    Vec3 center;          ///< meters, relative to the releasing node
    double radius = 0.0;  ///< meters
};

struct ChannelParams {
    double diffusion = 0.0;  ///< m^2/s
    Vec3 drift;              ///< m/s
    SphereReceiver receiver;

    void validate() const {
        if (!(diffusion > 0.0) || !std::isfinite(diffusion))
            throw DomainError("channel: diffusion coefficient must be positive and finite");
        if (!drift.finite() || !receiver.center.finite())
            throw DomainError("channel: drift and receiver center must be finite");
        if (!(receiver.radius > 0.0) || !std::isfinite(receiver.radius))
            throw DomainError("channel: receiver radius must be positive");
    }
};

namespace detail {

inline void require_positive_time(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("channel: time must be positive and finite");
}

// erf(b) - erf(a), evaluated through erfc where both arguments share a tail.
inline double erf_diff(double b, double a) {
    if (a > 0.0 && b > 0.0) return std::erfc(a) - std::erfc(b);
    if (a < 0.0 && b < 0.0) return std::erfc(-b) - std::erfc(-a);
    return std::erf(b) - std::erf(a);
}

inline constexpr double kFlushBelow = 1e-300;

}  // namespace detail

/// Molecule density (1/m^3) at `point`, given relative to the receiver center, at time t.
inline double pdf_at_point(const ChannelParams& params, Vec3 point, double t) {
    detail::require_positive_time(t);
    params.validate();
    const double four_dt = 4.0 * params.diffusion * t;
    const Vec3 offset = point + params.receiver.center - t * params.drift;
    const double norm = std::pow(std::numbers::pi * four_dt, -1.5);
    return norm * std::exp(-offset.dot(offset) / four_dt);
}

/// Closed-form presence probability before clamping. The slab decomposition it uses is
/// an approximation and can leave [0, 1]; callers normally want presence_probability().
inline double presence_probability_raw(const ChannelParams& params, double t) {
    detail::require_positive_time(t);
    params.validate();
    const double d = params.diffusion;
    const double r = params.receiver.radius;
    const Vec3 a = params.receiver.center - t * params.drift;
    const double four_dt = 4.0 * d * t;
    const double two_sqrt_dt = 2.0 * std::sqrt(d * t);

    auto y_weight = [&](double c) { return std::exp(-(c + a.y) * (c + a.y) / four_dt); };
    auto x_chord = [&](double half) {
        return detail::erf_diff((half + a.x) / two_sqrt_dt, (-half + a.x) / two_sqrt_dt);
    };

    double alpha_sum = 0.0;
    for (int k = 0; k <= 3; ++k) {
        const double c = (2.0 * k + 1.0) / 8.0;
        const double half = std::sqrt(1.0 - c * c) * r;
        alpha_sum += (y_weight(c * r) + y_weight(-c * r)) * x_chord(half);
    }
    double beta_sum = 0.0;
    for (int k = 1; k <= 3; ++k) {
        const double c = k / 4.0;
        const double half = std::sqrt(1.0 - c * c) * r;
        beta_sum += (y_weight(c * r) + y_weight(-c * r)) * x_chord(half);
    }
    const double phi = y_weight(0.0) * x_chord(r);

    const double prefactor = r * r / (144.0 * std::numbers::pi * d * t);
    const double z_weight = std::exp(-a.z * a.z / four_dt);
    return prefactor * z_weight * (4.0 * alpha_sum + 2.0 * beta_sum + 2.0 * phi);
}

/// Probability that a molecule released at the origin at time 0 is inside the receiver at t.
inline double presence_probability(const ChannelParams& params, double t) {
    const double raw = presence_probability_raw(params, t);
    const double p = std::clamp(raw, 0.0, 1.0);
    return p < detail::kFlushBelow ? 0.0 : p;
}

/// Channel for the relay-to-destination hop: destination expressed relative to the relay.
inline ChannelParams second_hop_params(Vec3 relay_center, Vec3 dest_center, double dest_radius,
                                       double diffusion, Vec3 drift) {
    if (!relay_center.finite() || !dest_center.finite())
        throw DomainError("second_hop_params: node centers must be finite");
    ChannelParams p{diffusion, drift, SphereReceiver{dest_center - relay_center, dest_radius}};
    p.validate();
    return p;
}

/// Presence probabilities P(j, i) at t = j*t_s - i*t_s/I for j = 1..J+1, and the per-slot
/// increments q(j, i) = max(P(j+1, i) - P(j, i), 0) for j = 1..J.
class ArrivalTable {
public:
    ArrivalTable() = default;
    ArrivalTable(int subslots, int isi_length)
        : subslots_(subslots),
          isi_length_(isi_length),
          presence_(static_cast<std::size_t>((isi_length + 1) * subslots), 0.0),
          increment_(static_cast<std::size_t>(isi_length * subslots), 0.0) {}

    [[nodiscard]] int subslots() const noexcept { return subslots_; }
    [[nodiscard]] int isi_length() const noexcept { return isi_length_; }
    /// Number of increments whose raw difference was negative and got clamped to zero.
    [[nodiscard]] int clamp_count() const noexcept { return clamp_count_; }

    /// j in [1, J+1], i in [0, I).
    [[nodiscard]] double presence(int j, int i) const { return presence_.at(index(j, i)); }
    /// j in [1, J], i in [0, I).
    [[nodiscard]] double increment(int j, int i) const { return increment_.at(index(j, i)); }

    void set_presence(int j, int i, double p) { presence_.at(index(j, i)) = p; }
    void set_increment(int j, int i, double q) { increment_.at(index(j, i)) = q; }
    void set_clamp_count(int n) noexcept { clamp_count_ = n; }

    /// Recomputes q from P (clamping negatives) and updates the clamp count.
    void derive_increments() {
        clamp_count_ = 0;
        for (int j = 1; j <= isi_length_; ++j) {
            for (int i = 0; i < subslots_; ++i) {
                const double raw = presence(j + 1, i) - presence(j, i);
                if (raw < 0.0) ++clamp_count_;
                set_increment(j, i, std::max(raw, 0.0));
            }
        }
    }

private:
    [[nodiscard]] std::size_t index(int j, int i) const {
        if (j < 1 || i < 0 || i >= subslots_) throw DomainError("ArrivalTable: index out of range");
        return static_cast<std::size_t>((j - 1) * subslots_ + i);
    }

    int subslots_ = 0;
    int isi_length_ = 0;
    int clamp_count_ = 0;
    std::vector<double> presence_;
    std::vector<double> increment_;
};

inline constexpr int kMaxIsiLength = 30;

inline ArrivalTable arrival_table(const ChannelParams& params, double t_s, int subslots, int isi_length) {
    if (!(t_s > 0.0) || !std::isfinite(t_s)) throw DomainError("arrival_table: t_s must be positive");
    if (subslots < 1) throw DomainError("arrival_table: need at least one sub-slot");
    if (isi_length < 0 || isi_length > kMaxIsiLength)
        throw DomainError("arrival_table: ISI length must lie in [0, " + std::to_string(kMaxIsiLength) + "]");

    ArrivalTable table(subslots, isi_length);
    for (int j = 1; j <= isi_length + 1; ++j) {
        for (int i = 0; i < subslots; ++i) {
            const double t = j * t_s - i * t_s / subslots;
            table.set_presence(j, i, presence_probability(params, t));
        }
    }
    table.derive_increments();
    return table;
}

}  // namespace mcvd
