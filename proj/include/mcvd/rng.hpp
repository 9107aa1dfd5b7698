#pragma once

// Seeded, stream-partitioned random numbers. Every stream owns its engine, so results depend
// only on (seed, streams, work size) and never on how many threads execute the streams.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

#include "mcvd/errors.hpp"

namespace mcvd {

struct RngConfig {
    std::uint64_t seed = 20261017;
    int streams = 8;
    int threads = 1;  ///< execution only; never changes results

    void validate() const {
        if (streams < 1) throw DomainError("rng: streams must be >= 1");
        if (threads < 1) throw DomainError("rng: threads must be >= 1");
    }
};

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Portable generator: mt19937_64 bits with hand-written transforms (the standard
/// distributions are implementation-defined and would break cross-platform reproducibility).
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t stream)
        : engine_(splitmix64(seed ^ splitmix64(stream + 0x5851F42D4C957F2DULL))) {}

    /// Uniform on (0, 1).
    double uniform() noexcept { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

    bool bernoulli(double p) noexcept { return uniform() < p; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Binomial(n, p) draws: exact chop-down inversion while n*min(p, 1-p) < 30, otherwise a
/// (continuous) normal approximation clamped to [0, n].
class BinomialSampler {
public:
    static constexpr double kNormalRegime = 30.0;

    BinomialSampler() = default;
    BinomialSampler(std::int64_t n, double p) : n_(n) {
        if (n < 0 || !(p >= 0.0 && p <= 1.0)) throw DomainError("binomial: need n >= 0 and p in [0, 1]");
        if (n == 0 || p == 0.0) {
            mode_ = Mode::constant;
            constant_ = 0.0;
            return;
        }
        if (p == 1.0) {
            mode_ = Mode::constant;
            constant_ = static_cast<double>(n);
            return;
        }
        flip_ = p > 0.5;
        const double pe = flip_ ? 1.0 - p : p;
        const double nd = static_cast<double>(n);
        if (nd * pe < kNormalRegime) {
            mode_ = Mode::inversion;
            pmf0_ = std::exp(nd * std::log1p(-pe));
            ratio_ = pe / (1.0 - pe);
        } else {
            mode_ = Mode::normal;
            mean_ = nd * p;
            sd_ = std::sqrt(nd * p * (1.0 - p));
        }
    }

    double operator()(StreamRng& rng) const {
        switch (mode_) {
            case Mode::constant: return constant_;
            case Mode::normal: return std::clamp(rng.normal(mean_, sd_), 0.0, static_cast<double>(n_));
            case Mode::inversion: break;
        }
        double u = rng.uniform();
        double pmf = pmf0_;
        std::int64_t k = 0;
        while (u > pmf && k < n_) {
            u -= pmf;
            pmf *= ratio_ * static_cast<double>(n_ - k) / static_cast<double>(k + 1);
            ++k;
        }
        return static_cast<double>(flip_ ? n_ - k : k);
    }

private:
    enum class Mode { constant, inversion, normal };
    Mode mode_ = Mode::constant;
    std::int64_t n_ = 0;
    bool flip_ = false;
    double constant_ = 0.0;
    double pmf0_ = 0.0;
    double ratio_ = 0.0;
    double mean_ = 0.0;
    double sd_ = 0.0;
};

/// Trials assigned to stream k when `total` trials are split across `streams`.
inline std::int64_t stream_share(std::int64_t total, int streams, int k) {
    const std::int64_t base = total / streams;
    return base + (k < total % streams ? 1 : 0);
}

/// Runs fn(stream_index, rng, trials) for every stream and returns the per-stream results in
/// stream order.
template <class Result, class Fn>
std::vector<Result> run_streams(const RngConfig& cfg, std::int64_t total, Fn&& fn) {
    cfg.validate();
    std::vector<Result> results(static_cast<std::size_t>(cfg.streams));
    auto work = [&](int k) {
        StreamRng rng(cfg.seed, static_cast<std::uint64_t>(k));
        results[static_cast<std::size_t>(k)] = fn(k, rng, stream_share(total, cfg.streams, k));
    };
    const int threads = std::min(cfg.threads, cfg.streams);
    if (threads <= 1) {
        for (int k = 0; k < cfg.streams; ++k) work(k);
        return results;
    }
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (int k = w; k < cfg.streams; k += threads) work(k);
        });
    }
    pool.clear();
    return results;
}

}  // namespace mcvd
