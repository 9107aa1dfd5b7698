#pragma once

// Symbol-duration optimization: maximize F(t_s) = P_success(t_s) / t_s by level bisection.

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "mcvd/errors.hpp"
#include "mcvd/link.hpp"
#include "mcvd/reception.hpp"

namespace mcvd {

struct OptimizerConfig {
    double epsilon = 0.01;            ///< stop when upper - lower <= epsilon (bits/s)
    double t_min = 1e-3;              ///< s
    double t_max = 100e-3;            ///< s
    int feasibility_samples = 200;    ///< uniform grid density of the feasibility check
    double level_upper_init = 1e3;    ///< initial upper bound on the level
    int max_iterations = 64;

    void validate() const {
        if (!(t_min > 0.0) || !(t_min < t_max)) throw DomainError("optimizer: need 0 < t_min < t_max");
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("optimizer: epsilon must lie in (0, 1)");
        if (feasibility_samples < 100) throw DomainError("optimizer: feasibility_samples must be >= 100");
        if (!(level_upper_init > 0.0)) throw DomainError("optimizer: level_upper_init must be positive");
        if (max_iterations < 1) throw DomainError("optimizer: max_iterations must be >= 1");
    }
};

using Objective = std::function<double(double)>;

/// Successfully received bits per second at symbol duration t_s.
inline double objective(double t_s, const LinkScenario& scenario) {
    return evaluate_link(scenario, t_s, false).objective;
}

inline Objective make_objective(const LinkScenario& scenario) {
    return [scenario](double t_s) { return objective(t_s, scenario); };
}

/// Golden-section maximizer on [lo, hi]; returns the abscissa.
inline double golden_section_maximize(const Objective& f, double lo, double hi, double tol = 1e-9) {
    return detail::golden_minimize([&](double t) { return -f(t); }, lo, hi,
                                   static_cast<int>(std::ceil(std::log(std::max((hi - lo) / tol, 2.0)) / 0.4812)) + 1);
}

/// The points at which the feasibility check samples the objective: a uniform grid on
/// [t_min, t_max] plus one golden-section refinement around the best grid point.
class FeasibilityProbe {
public:
    FeasibilityProbe(const Objective& f, const OptimizerConfig& cfg) {
        cfg.validate();
        const int n = cfg.feasibility_samples;
        const double h = (cfg.t_max - cfg.t_min) / (n - 1);
        for (int k = 0; k < n; ++k) {
            const double t = k == n - 1 ? cfg.t_max : cfg.t_min + k * h;
            const double v = f(t);
            if (k == 0 || v > best_value_) {
                best_value_ = v;
                best_t_ = t;
            }
        }
        const double lo = std::max(cfg.t_min, best_t_ - h);
        const double hi = std::min(cfg.t_max, best_t_ + h);
        const double t_ref = golden_section_maximize(f, lo, hi, 1e-9 * (cfg.t_max - cfg.t_min));
        const double v_ref = f(t_ref);
        if (v_ref > best_value_) {
            best_value_ = v_ref;
            best_t_ = t_ref;
        }
    }

    /// Is there a sampled t_s with objective strictly above `level`?
    [[nodiscard]] bool feasible(double level) const noexcept { return best_value_ > level; }
    [[nodiscard]] double witness() const noexcept { return best_t_; }
    [[nodiscard]] double witness_value() const noexcept { return best_value_; }

private:
    double best_t_ = 0.0;
    double best_value_ = 0.0;
};

struct FeasibilityResult {
    bool feasible = false;
    double witness = 0.0;        ///< t_s, valid when feasible
    double witness_value = 0.0;
};

inline FeasibilityResult feasibility(double level, const Objective& f, const OptimizerConfig& cfg) {
    if (!(level >= 0.0)) throw DomainError("feasibility: level must be non-negative");
    const FeasibilityProbe probe(f, cfg);
    return {probe.feasible(level), probe.witness(), probe.witness_value()};
}

inline FeasibilityResult feasibility(double level, const LinkScenario& sc, const OptimizerConfig& cfg) {
    return feasibility(level, make_objective(sc), cfg);
}

struct BisectionStep {
    int iteration = 0;
    double level = 0.0;
    double lower = 0.0;  ///< after the update
    double upper = 0.0;  ///< after the update
    bool feasible = false;
    double witness = 0.0;
};

struct Optimum {
    double t_star = 0.0;
    double f_star = 0.0;
    int iterations = 0;
    std::vector<BisectionStep> trace;
};

/// Level bisection: l = (lower + upper)/2; feasible -> lower = l, else upper = l; stop once
/// upper - lower <= epsilon. f_star is the final lower bound, t_star the last witness.
inline Optimum bisection_optimize(const Objective& f, const OptimizerConfig& cfg) {
    cfg.validate();
    const FeasibilityProbe probe(f, cfg);
    Optimum opt;
    double lower = 0.0;
    double upper = cfg.level_upper_init;
    opt.t_star = probe.witness();
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        const double level = 0.5 * (lower + upper);
        const bool ok = probe.feasible(level);
        (ok ? lower : upper) = level;
        if (ok) opt.t_star = probe.witness();
        opt.trace.push_back({it, level, lower, upper, ok, probe.witness()});
        if (std::abs(upper - lower) <= cfg.epsilon) {
            if (upper == cfg.level_upper_init)
                throw ConvergenceError("bisection_optimize: objective reaches level_upper_init; raise it");
            opt.f_star = lower;
            opt.iterations = it;
            return opt;
        }
    }
    std::ostringstream msg;
    msg << "bisection_optimize: no convergence in " << cfg.max_iterations << " iterations; last bounds ["
        << lower << ", " << upper << "]";
    throw ConvergenceError(msg.str());
}

inline Optimum bisection_optimize(const LinkScenario& sc, const OptimizerConfig& cfg) {
    return bisection_optimize(make_objective(sc), cfg);
}

struct SignScan {
    std::vector<double> t;
    std::vector<int> signs;  ///< -1, 0, +1 per grid point
    int sign_changes = 0;    ///< transitions between consecutive non-zero signs
    int zero_count = 0;
    bool unimodal = true;    ///< no -1 is ever followed by +1

    [[nodiscard]] bool single_sign_change() const noexcept { return sign_changes == 1 && unimodal; }
};

/// Sign of the central finite difference of f at each grid point.
inline SignScan derivative_sign_scan(const Objective& f, const std::vector<double>& t_grid) {
    if (!std::is_sorted(t_grid.begin(), t_grid.end()) ||
        std::any_of(t_grid.begin(), t_grid.end(), [](double t) { return !(t > 0.0); }))
        throw DomainError("derivative_sign_scan: grid must be sorted and positive");
    SignScan scan;
    scan.t = t_grid;
    int last = 0;
    for (const double t : t_grid) {
        const double h = 1e-6 * t;
        const double up = f(t + h);
        const double down = f(t - h);
        const double diff = up - down;
        const double tol = 1e-12 * std::max({1.0, std::abs(up), std::abs(down)});
        const int s = std::abs(diff) <= tol ? 0 : (diff > 0 ? 1 : -1);
        scan.signs.push_back(s);
        if (s == 0) {
            ++scan.zero_count;
            continue;
        }
        if (last != 0 && s != last) {
            ++scan.sign_changes;
            if (last < 0) scan.unimodal = false;
        }
        last = s;
    }
    return scan;
}

}  // namespace mcvd
