#pragma once

// Gaussian statistics of the molecule count at a passive receiver, and the MAP threshold.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>

#include "mcvd/channel.hpp"
#include "mcvd/errors.hpp"
#include "mcvd/pulse.hpp"

namespace mcvd {

struct Priors {
    double pi1 = 0.5;  ///< probability the transmitted bit is "1"

    [[nodiscard]] double pi0() const noexcept { return 1.0 - pi1; }
    void validate() const {
        if (!(pi1 >= 0.0 && pi1 <= 1.0)) throw DomainError("priors: pi1 must lie in [0, 1]");
    }
};

/// Source noise from other emitters, added to every count.
struct NoiseParams {
    double mean = 100.0;
    double variance = 100.0;

    void validate() const {
        if (!(mean >= 0.0 && variance >= 0.0) || !std::isfinite(mean) || !std::isfinite(variance))
            throw DomainError("noise: mean and variance must be finite and non-negative");
    }
};

struct LinkStats {
    double mu0 = 0.0;
    double var0 = 0.0;
    double mu1 = 0.0;
    double var1 = 0.0;
    std::optional<double> threshold;

    // Components kept for diagnostics and consistency checks.
    double isi_mean = 0.0;
    double isi_variance = 0.0;
    double signal_mean = 0.0;      ///< sum_i g(i) P(1, i)
    double signal_variance = 0.0;  ///< sum_i g(i) P(1, i) (1 - P(1, i))

    [[nodiscard]] double tau() const {
        if (!threshold) throw StateError("link stats: detection threshold not set");
        return *threshold;
    }
};

namespace detail {

inline void check_dimensions(const PulseShape& pulse, const ArrivalTable& table) {
    pulse.validate();
    if (pulse.subslots() != table.subslots())
        throw DomainError("pulse has " + std::to_string(pulse.subslots()) + " sub-slots but arrival table has " +
                          std::to_string(table.subslots()));
}

}  // namespace detail

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Mean and variance of the interference from the J previous slots, each slot's bit drawn
/// independently with the given priors. Accumulated slice by slice (per previous slot j).
inline Moments isi_moments(const PulseShape& pulse, const ArrivalTable& table, const Priors& priors) {
    detail::check_dimensions(pulse, table);
    priors.validate();
    const double pi1 = priors.pi1;
    const double pi0 = priors.pi0();
    Moments m;
    for (int j = 1; j <= table.isi_length(); ++j) {
        double slice_mean = 0.0;
        double slice_binomial_var = 0.0;
        for (int i = 0; i < table.subslots(); ++i) {
            const double g = static_cast<double>(pulse.counts[static_cast<std::size_t>(i)]);
            const double q = table.increment(j, i);
            slice_mean += g * q;
            slice_binomial_var += g * q * (1.0 - q);
        }
        m.mean += pi1 * slice_mean;
        m.variance += pi1 * slice_binomial_var + pi0 * pi1 * slice_mean * slice_mean;
    }
    return m;
}

/// Conditional count statistics for one hop. Counting-noise variance equals the conditional
/// mean of each hypothesis. The threshold is left unset.
inline LinkStats link_stats(const PulseShape& pulse, const ArrivalTable& table, const Priors& priors,
                            const NoiseParams& noise) {
    noise.validate();
    const Moments isi = isi_moments(pulse, table, priors);

    double signal_mean = 0.0;
    double signal_var = 0.0;
    for (int i = 0; i < table.subslots(); ++i) {
        const double g = static_cast<double>(pulse.counts[static_cast<std::size_t>(i)]);
        const double p = table.presence(1, i);
        signal_mean += g * p;
        signal_var += g * p * (1.0 - p);
    }

    LinkStats s;
    s.isi_mean = isi.mean;
    s.isi_variance = isi.variance;
    s.signal_mean = signal_mean;
    s.signal_variance = signal_var;
    s.mu0 = isi.mean + noise.mean;
    s.mu1 = s.mu0 + signal_mean;
    s.var0 = isi.variance + noise.variance + s.mu0;
    s.var1 = isi.variance + signal_var + noise.variance + s.mu1;
    return s;
}

/// Upper-tail probability Pr(X >= tau) for X ~ N(mu, var).
inline double gaussian_exceedance(double tau, double mu, double var) {
    if (tau == std::numeric_limits<double>::infinity()) return 0.0;
    if (tau == -std::numeric_limits<double>::infinity()) return 1.0;
    return 0.5 * std::erfc((tau - mu) / std::sqrt(2.0 * var));
}

/// Single-hop error probability of the rule "decide 1 iff count >= tau".
inline double threshold_error(const LinkStats& s, const Priors& priors, double tau) {
    return priors.pi1 * (1.0 - gaussian_exceedance(tau, s.mu1, s.var1)) +
           priors.pi0() * gaussian_exceedance(tau, s.mu0, s.var0);
}

namespace detail {

inline double golden_minimize(auto&& f, double lo, double hi, int iterations = 200) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int k = 0; k < iterations && (b - a) > 1e-12 * (1.0 + std::abs(a) + std::abs(b)); ++k) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Grid-plus-refine minimizer of the threshold error, used when the likelihood-ratio
// quadratic has no usable root.
inline double numeric_threshold(const LinkStats& s, const Priors& priors) {
    const double spread = 10.0 * std::sqrt(std::max(s.var0, s.var1));
    const double lo = std::min(s.mu0, s.mu1) - spread;
    const double hi = std::max(s.mu0, s.mu1) + spread;
    constexpr int kGrid = 10'000;
    const double h = (hi - lo) / kGrid;
    double best = lo;
    double best_err = threshold_error(s, priors, lo);
    for (int k = 1; k <= kGrid; ++k) {
        const double tau = lo + k * h;
        const double e = threshold_error(s, priors, tau);
        if (e < best_err) {
            best_err = e;
            best = tau;
        }
    }
    return golden_minimize([&](double tau) { return threshold_error(s, priors, tau); }, best - h, best + h);
}

}  // namespace detail

/// MAP threshold: the count at which the prior-weighted conditional Gaussian densities cross.
inline double map_threshold(const LinkStats& s, const Priors& priors) {
    priors.validate();
    if (!(s.var0 > 0.0) || !(s.var1 > 0.0)) throw DomainError("map_threshold: variances must be positive");
    if (s.mu0 == s.mu1 && s.var0 == s.var1)
        throw NoThresholdError("map_threshold: conditional distributions are identical");
    if (priors.pi1 == 0.0) return std::numeric_limits<double>::infinity();
    if (priors.pi1 == 1.0) return -std::numeric_limits<double>::infinity();

    // v1 (x - mu0)^2 - v0 (x - mu1)^2 + 2 v0 v1 L = 0
    const double v0 = s.var0, v1 = s.var1;
    const double log_term = std::log(priors.pi1 / priors.pi0()) + 0.5 * std::log(v0 / v1);
    const double a = v1 - v0;
    const double b = -2.0 * (v1 * s.mu0 - v0 * s.mu1);
    const double c = v1 * s.mu0 * s.mu0 - v0 * s.mu1 * s.mu1 + 2.0 * v0 * v1 * log_term;

    const double lo = std::min(s.mu0, s.mu1);
    const double hi = std::max(s.mu0, s.mu1);
    auto inside = [&](double x) { return std::isfinite(x) && x > lo && x < hi; };

    const double scale = std::max(std::abs(v0), std::abs(v1));
    if (std::abs(a) <= 1e-14 * scale) {
        if (b != 0.0) {
            const double root = -c / b;
            if (inside(root)) return root;
        }
        return detail::numeric_threshold(s, priors);
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double qv = -0.5 * (b + std::copysign(sq, b));
        const double r1 = qv / a;
        const double r2 = qv != 0.0 ? c / qv : r1;
        if (inside(r1)) return r1;
        if (inside(r2)) return r2;
    }
    return detail::numeric_threshold(s, priors);
}

/// Pr(decide 1 | bit 1) and Pr(decide 1 | bit 0) at the stats' threshold.
inline std::pair<double, double> detection_probabilities(const LinkStats& s) {
    const double tau = s.tau();
    return {gaussian_exceedance(tau, s.mu1, s.var1), gaussian_exceedance(tau, s.mu0, s.var0)};
}

}  // namespace mcvd
