#pragma once

// Independent oracles for the analytic pipeline: particle sampling, deterministic quadrature,
// binomial-mixture count sampling and a bit-level relay link simulator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <vector>

#include "mcvd/channel.hpp"
#include "mcvd/errors.hpp"
#include "mcvd/link.hpp"
#include "mcvd/quadrature.hpp"
#include "mcvd/reception.hpp"
#include "mcvd/rng.hpp"

namespace mcvd {

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t trials = 0;
};

// ---------------------------------------------------------------------------------------------
// Presence probability

/// Fraction of particles inside the receiver at time t. Each particle's position is drawn
/// directly from the Gaussian law of Brownian motion with constant drift.
inline McEstimate mc_presence_probability(const ChannelParams& params, double t, std::int64_t trials,
                                          const RngConfig& rng) {
    if (trials < 1) throw DomainError("mc_presence_probability: trials must be >= 1");
    detail::require_positive_time(t);
    params.validate();
    const double sd = std::sqrt(2.0 * params.diffusion * t);
    const Vec3 mean = t * params.drift - params.receiver.center;  // relative to the sphere center
    const double r2 = params.receiver.radius * params.receiver.radius;

    auto hits = run_streams<std::int64_t>(rng, trials, [&](int, StreamRng& g, std::int64_t n) {
        std::int64_t inside = 0;
        for (std::int64_t k = 0; k < n; ++k) {
            const Vec3 pos{mean.x + sd * g.normal(), mean.y + sd * g.normal(), mean.z + sd * g.normal()};
            if (pos.dot(pos) <= r2) ++inside;
        }
        return inside;
    });
    std::int64_t total = 0;
    for (const auto h : hits) total += h;
    const double p = static_cast<double>(total) / static_cast<double>(trials);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials)), trials};
}

namespace detail {

// One tensor-product evaluation. Spherical coordinates about the receiver center with the
// polar axis pointing at the Gaussian mean; the integrand is axisymmetric so the azimuthal
// integral contributes exactly 2*pi. Regions more than ~14 sigma from the mean are dropped.
inline double sphere_gaussian_integral(double dist, double sigma2, double radius, const GaussLegendreRule& rule) {
    constexpr double kRadialCut = 14.0;
    constexpr double kPolarCut = 100.0;
    const double sigma = std::sqrt(sigma2);
    const double rho_lo = std::max(0.0, dist - kRadialCut * sigma);
    const double rho_hi = std::min(radius, dist + kRadialCut * sigma);
    if (rho_lo >= rho_hi) return 0.0;

    const double norm = std::pow(2.0 * std::numbers::pi * sigma2, -1.5) * 2.0 * std::numbers::pi;
    auto shell = [&](double rho) {
        const double radial = -(rho - dist) * (rho - dist) / (2.0 * sigma2);
        const double kappa = rho * dist / sigma2;
        const double u_lo = kappa > 0.0 ? std::max(-1.0, 1.0 - kPolarCut / kappa) : -1.0;
        const double polar = rule.integrate([&](double u) { return std::exp(radial - kappa * (1.0 - u)); }, u_lo, 1.0);
        return rho * rho * polar;
    };
    return norm * rule.integrate(shell, rho_lo, rho_hi);
}

}  // namespace detail

/// Deterministic volume integral of the molecule density over the receiver sphere, with the
/// Gauss-Legendre order doubled from `order` until successive results agree to 1e-8 relative.
inline double quadrature_presence_probability(const ChannelParams& params, double t, int order = 16) {
    if (order < 16) throw DomainError("quadrature_presence_probability: order must be >= 16");
    detail::require_positive_time(t);
    params.validate();
    constexpr int kMaxOrder = 1024;
    constexpr double kRelTol = 1e-8;

    const double sigma2 = 2.0 * params.diffusion * t;
    const double dist = (t * params.drift - params.receiver.center).norm();
    const double radius = params.receiver.radius;

    std::ostringstream trace;
    double previous = detail::sphere_gaussian_integral(dist, sigma2, radius, gauss_legendre(order));
    trace << "order " << order << ": " << previous;
    for (int n = 2 * order; n <= kMaxOrder; n *= 2) {
        const double current = detail::sphere_gaussian_integral(dist, sigma2, radius, gauss_legendre(n));
        trace << "; order " << n << ": " << current;
        if (std::abs(current - previous) <= kRelTol * std::abs(current) || std::abs(current) < 1e-300)
            return std::clamp(current, 0.0, 1.0);
        previous = current;
    }
    throw ConvergenceError("quadrature_presence_probability did not converge (" + trace.str() + ")");
}

// ---------------------------------------------------------------------------------------------
// Count statistics

/// Streaming mean/variance/central-moment accumulator that merges exactly across streams.
class MomentAccumulator {
public:
    void push(double x) {
        const double n1 = static_cast<double>(n_);
        ++n_;
        const double n = static_cast<double>(n_);
        const double delta = x - mean_;
        const double delta_n = delta / n;
        const double delta_n2 = delta_n * delta_n;
        const double term1 = delta * delta_n * n1;
        mean_ += delta_n;
        m4_ += term1 * delta_n2 * (n * n - 3 * n + 3) + 6 * delta_n2 * m2_ - 4 * delta_n * m3_;
        m3_ += term1 * delta_n * (n - 2) - 3 * delta_n * m2_;
        m2_ += term1;
    }

    void merge(const MomentAccumulator& b) {
        if (b.n_ == 0) return;
        if (n_ == 0) {
            *this = b;
            return;
        }
        const double na = static_cast<double>(n_), nb = static_cast<double>(b.n_);
        const double n = na + nb;
        const double delta = b.mean_ - mean_;
        const double d2 = delta * delta, d3 = d2 * delta, d4 = d2 * d2;
        const double m2 = m2_ + b.m2_ + d2 * na * nb / n;
        const double m3 = m3_ + b.m3_ + d3 * na * nb * (na - nb) / (n * n) + 3.0 * delta * (na * b.m2_ - nb * m2_) / n;
        const double m4 = m4_ + b.m4_ + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                          6.0 * d2 * (na * na * b.m2_ + nb * nb * m2_) / (n * n) +
                          4.0 * delta * (na * b.m3_ - nb * m3_) / n;
        mean_ = (na * mean_ + nb * b.mean_) / n;
        m2_ = m2;
        m3_ = m3;
        m4_ = m4;
        n_ += b.n_;
    }

    [[nodiscard]] std::int64_t count() const noexcept { return n_; }
    [[nodiscard]] double mean() const noexcept { return mean_; }
    [[nodiscard]] double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

    [[nodiscard]] McEstimate mean_estimate() const {
        return {mean_, std::sqrt(variance() / static_cast<double>(n_)), n_};
    }
    /// Sample variance with its large-sample standard error sqrt((m4 - s^4) / n).
    [[nodiscard]] McEstimate variance_estimate() const {
        const double n = static_cast<double>(n_);
        const double s2 = m2_ / n;
        const double m4 = m4_ / n;
        return {variance(), std::sqrt(std::max(m4 - s2 * s2, 0.0) / n), n_};
    }

private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double m3_ = 0.0;
    double m4_ = 0.0;
};

struct CountMoments {
    McEstimate mean0, var0, mean1, var1;
};

namespace detail {

// Per-lag binomial samplers: lag 0 uses P(1, i) (current slot), lag j >= 1 uses q(j, i).
inline std::vector<std::vector<BinomialSampler>> lag_samplers(const PulseShape& pulse, const ArrivalTable& table) {
    std::vector<std::vector<BinomialSampler>> out(static_cast<std::size_t>(table.isi_length() + 1));
    for (int j = 0; j <= table.isi_length(); ++j) {
        auto& row = out[static_cast<std::size_t>(j)];
        for (int i = 0; i < table.subslots(); ++i) {
            const double p = j == 0 ? table.presence(1, i) : table.increment(j, i);
            row.emplace_back(pulse.counts[static_cast<std::size_t>(i)], p);
        }
    }
    return out;
}

inline double sample_lag(const std::vector<BinomialSampler>& row, StreamRng& rng) {
    double sum = 0.0;
    for (const auto& s : row) sum += s(rng);
    return sum;
}

// Source noise plus counting noise whose variance is the realized pre-noise count; floored at zero.
inline double add_noise(double molecules, const NoiseParams& noise, StreamRng& rng) {
    const double with_source = molecules + rng.normal(noise.mean, std::sqrt(noise.variance));
    return std::max(with_source + std::sqrt(std::max(with_source, 0.0)) * rng.normal(), 0.0);
}

}  // namespace detail

/// Empirical conditional moments of the received count, sampling the exact binomial mixture
/// (interfering bits drawn from the priors), for the current bit fixed at 0 and at 1.
inline CountMoments mc_count_moments(const PulseShape& pulse, const ArrivalTable& table, const Priors& priors,
                                     const NoiseParams& noise, std::int64_t trials, const RngConfig& rng) {
    if (trials < 10'000) throw DomainError("mc_count_moments: trials must be >= 1e4");
    detail::check_dimensions(pulse, table);
    priors.validate();
    noise.validate();
    const auto samplers = detail::lag_samplers(pulse, table);

    struct Pair {
        MomentAccumulator zero, one;
    };
    auto parts = run_streams<Pair>(rng, trials, [&](int, StreamRng& g, std::int64_t n) {
        Pair acc;
        for (std::int64_t k = 0; k < n; ++k) {
            for (int bit = 0; bit <= 1; ++bit) {
                double molecules = bit ? detail::sample_lag(samplers[0], g) : 0.0;
                for (int j = 1; j <= table.isi_length(); ++j)
                    if (g.bernoulli(priors.pi1)) molecules += detail::sample_lag(samplers[static_cast<std::size_t>(j)], g);
                (bit ? acc.one : acc.zero).push(detail::add_noise(molecules, noise, g));
            }
        }
        return acc;
    });
    MomentAccumulator zero, one;
    for (const auto& p : parts) {
        zero.merge(p.zero);
        one.merge(p.one);
    }
    return {zero.mean_estimate(), zero.variance_estimate(), one.mean_estimate(), one.variance_estimate()};
}

// ---------------------------------------------------------------------------------------------
// Bit-level link simulation

/// Simulates source -> relay -> destination with decode-and-forward at the relay (one-slot
/// delay), binomial arrivals with ISI memory J, source and counting noise, and the analytic
/// MAP thresholds. Returns the empirical end-to-end bit error rate.
inline McEstimate mc_link_ber(const LinkScenario& sc, double t_s, std::int64_t bits, const RngConfig& rng) {
    if (bits < 1000) throw DomainError("mc_link_ber: bits must be >= 1000");
    const LinkEvaluation ev = evaluate_link(sc, t_s, false);
    const double tau_r = ev.stats_sr.tau();
    const double tau_d = ev.stats_rd.tau();
    const auto hop1 = detail::lag_samplers(sc.source_pulse, ev.table_sr);
    const auto hop2 = detail::lag_samplers(sc.relay_pulse, ev.table_rd);
    const int memory = sc.isi_length;

    auto errors = run_streams<std::int64_t>(rng, bits, [&](int, StreamRng& g, std::int64_t n) {
        // Circular histories of the last memory+1 source bits and relay bits (index 0 = current).
        std::vector<std::uint8_t> src(static_cast<std::size_t>(memory + 1), 0);
        std::vector<std::uint8_t> rel(static_cast<std::size_t>(memory + 1), 0);
        auto received = [&](const std::vector<std::uint8_t>& hist, std::size_t head,
                            const std::vector<std::vector<BinomialSampler>>& samplers, const NoiseParams& noise) {
            double molecules = 0.0;
            for (int j = 0; j <= memory; ++j) {
                const std::size_t idx = (head + hist.size() - static_cast<std::size_t>(j)) % hist.size();
                if (hist[idx]) molecules += detail::sample_lag(samplers[static_cast<std::size_t>(j)], g);
            }
            return detail::add_noise(molecules, noise, g);
        };

        std::int64_t wrong = 0;
        std::size_t head = 0;
        const std::int64_t warmup = 2 * static_cast<std::int64_t>(memory) + 1;
        for (std::int64_t k = 0; k < n + warmup; ++k) {
            head = (head + 1) % src.size();
            const std::uint8_t x = g.bernoulli(sc.priors.pi1) ? 1 : 0;
            src[head] = x;
            // Relay decides on slot k and forwards the decision in slot k + 1; the destination
            // decides that forwarded bit at the end of slot k + 1.
            const std::uint8_t relay_bit = received(src, head, hop1, sc.relay_noise) >= tau_r ? 1 : 0;
            rel[head] = relay_bit;
            const std::uint8_t dest_bit = received(rel, head, hop2, sc.destination_noise) >= tau_d ? 1 : 0;
            if (k >= warmup && dest_bit != x) ++wrong;
        }
        return wrong;
    });
    std::int64_t total = 0;
    for (const auto e : errors) total += e;
    const double p = static_cast<double>(total) / static_cast<double>(bits);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(bits)), bits};
}

}  // namespace mcvd
