#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>

#include "mcvd/experiment.hpp"
#include "mcvd/montecarlo.hpp"

using namespace mcvd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double um = 1e-6;

// Pr(|X| <= r) for X ~ N(m, s^2 I_3) with |m| = d: noncentral chi-square with 3 degrees of freedom.
double sphere_mass(double d, double s, double r) {
    const double rt2 = std::sqrt(2.0);
    if (d == 0.0)
        return std::erf(r / (s * rt2)) - std::sqrt(2.0 / std::numbers::pi) * (r / s) * std::exp(-r * r / (2 * s * s));
    return 0.5 * (std::erf((r - d) / (s * rt2)) + std::erf((r + d) / (s * rt2))) -
           s / (d * std::sqrt(2 * std::numbers::pi)) *
               (std::exp(-(r - d) * (r - d) / (2 * s * s)) - std::exp(-(r + d) * (r + d) / (2 * s * s)));
}

ChannelParams baseline_params() { return {4e-9, {100 * um, 40 * um, 40 * um}, {{100 * um, 12 * um, 14 * um}, 50 * um}}; }

LinkScenario j0_scenario(std::int64_t molecules, NoiseParams noise = {}) {
    LinkScenario sc;
    sc.drift = {100 * um, 40 * um, 40 * um};
    sc.relay = {{70 * um, 5 * um, 5 * um}, 50 * um};
    sc.destination = {{140 * um, 10 * um, 10 * um}, 50 * um};
    sc.source_pulse = make_pulse(ShapeFamily::uniform(), 4, molecules, 0.005);
    sc.relay_pulse = sc.source_pulse;
    sc.isi_length = 0;
    sc.relay_noise = noise;
    sc.destination_noise = noise;
    return sc;
}

}  // namespace

TEST_CASE("quadrature matches the closed-form sphere mass", "[montecarlo][oracle]") {
    const ChannelParams centered{4e-9, {}, {{}, 50 * um}};
    for (double t : {1e-3, 0.05, 0.3, 2.0}) {
        const double s = std::sqrt(2 * 4e-9 * t);
        CHECK_THAT(quadrature_presence_probability(centered, t), WithinRel(sphere_mass(0.0, s, 50 * um), 1e-8));
    }
    for (const auto& pt : presence_grid(20)) {
        const double s = std::sqrt(2 * pt.params.diffusion * pt.t);
        const double d = (pt.t * pt.params.drift - pt.params.receiver.center).norm();
        const double ref = sphere_mass(d, s, pt.params.receiver.radius);
        if (ref > 1e-12) CHECK_THAT(quadrature_presence_probability(pt.params, pt.t), WithinRel(ref, 1e-7));
    }
}

TEST_CASE("quadrature of a far receiver", "[montecarlo]") {
    const ChannelParams far{4e-9, {}, {{1.0, 0, 0}, 50 * um}};
    CHECK(quadrature_presence_probability(far, 1.0) < 1e-12);
    CHECK_THROWS_AS(quadrature_presence_probability(far, 1.0, 8), DomainError);
}

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly", "[montecarlo]") {
    const auto rule = gauss_legendre(8);
    CHECK_THAT(rule.integrate([](double x) { return std::pow(x, 15) + 3 * x * x; }, -1, 2),
               WithinRel((std::pow(2.0, 16) - 1) / 16 + 9.0, 1e-13));
    double w = 0;
    for (double v : gauss_legendre(33).weights) w += v;
    CHECK_THAT(w, WithinRel(2.0, 1e-14));
}

TEST_CASE("particle sampler limits", "[montecarlo]") {
    RngConfig rng;
    const ChannelParams huge{4e-9, {}, {{}, 1.0}};
    CHECK(mc_presence_probability(huge, 1e-6, 10'000, rng).value == 1.0);
    const ChannelParams far{4e-9, {}, {{1.0, 0, 0}, 50 * um}};
    CHECK(mc_presence_probability(far, 1.0, 1'000'000, rng).value == 0.0);
    CHECK_THROWS_AS(mc_presence_probability(far, 1.0, 0, rng), DomainError);
}

TEST_CASE("particle sampler agrees with quadrature at the baseline point", "[montecarlo][oracle]") {
    RngConfig rng;
    const auto p = baseline_params();
    const double quad = quadrature_presence_probability(p, 0.018);
    const auto mc = mc_presence_probability(p, 0.018, 1'000'000, rng);
    const double se = std::sqrt(quad * (1 - quad) / 1e6);
    CHECK(std::abs(mc.value - quad) <= 3 * se);
}

TEST_CASE("results do not depend on the thread count", "[montecarlo][property]") {
    RngConfig one;
    one.threads = 1;
    RngConfig many = one;
    many.threads = 3;
    const auto p = baseline_params();
    CHECK(mc_presence_probability(p, 0.3, 200'000, one).value == mc_presence_probability(p, 0.3, 200'000, many).value);
    const auto sc = j0_scenario(60000, {100, 100});
    CHECK(mc_link_ber(sc, 0.005, 50'000, one).value == mc_link_ber(sc, 0.005, 50'000, many).value);
    RngConfig other = one;
    other.seed += 1;
    CHECK(mc_presence_probability(p, 0.3, 200'000, one).value != mc_presence_probability(p, 0.3, 200'000, other).value);
}

TEST_CASE("moment accumulator merges exactly", "[montecarlo]") {
    MomentAccumulator all, a, b, c;
    StreamRng g(7, 0);
    for (int k = 0; k < 30'000; ++k) {
        const double x = g.normal(3.0, 2.0) + (k % 7) * 0.5;
        all.push(x);
        (k < 10'000 ? a : (k < 12'345 ? b : c)).push(x);
    }
    a.merge(b);
    a.merge(c);
    CHECK(a.count() == all.count());
    CHECK_THAT(a.mean(), WithinRel(all.mean(), 1e-12));
    CHECK_THAT(a.variance(), WithinRel(all.variance(), 1e-11));
    CHECK_THAT(a.variance_estimate().std_error, WithinRel(all.variance_estimate().std_error, 1e-9));
}

TEST_CASE("binomial sampler moments in both regimes", "[montecarlo]") {
    StreamRng g(11, 3);
    for (auto [n, p] : {std::pair<std::int64_t, double>{40, 0.2}, {500, 0.97}, {100000, 0.3}, {7, 0.0}, {7, 1.0}}) {
        const BinomialSampler s(n, p);
        MomentAccumulator acc;
        for (int k = 0; k < 200'000; ++k) acc.push(s(g));
        const double mean = n * p, var = n * p * (1 - p);
        CHECK(std::abs(acc.mean() - mean) <= 4 * std::sqrt(var / 2e5) + 1e-12);
        if (var > 0) CHECK_THAT(acc.variance(), WithinRel(var, 0.02));
    }
    CHECK_THROWS_AS(BinomialSampler(-1, 0.5), DomainError);
    CHECK_THROWS_AS(BinomialSampler(5, 1.5), DomainError);
}

TEST_CASE("count moments of a silent transmitter", "[montecarlo]") {
    RngConfig rng;
    const PulseShape p{{0, 0}, 0.01};
    ArrivalTable t(2, 2);
    for (int j = 1; j <= 3; ++j)
        for (int i = 0; i < 2; ++i) t.set_presence(j, i, 0.1 * j);
    t.derive_increments();
    const auto m = mc_count_moments(p, t, Priors{0.5}, NoiseParams{100, 100}, 200'000, rng);
    CHECK(std::abs(m.mean0.value - 100) < 4 * m.mean0.std_error);
    CHECK(std::abs(m.var0.value - 200) < 4 * m.var0.std_error);
    CHECK(std::abs(m.mean1.value - 100) < 4 * m.mean1.std_error);
    CHECK_THROWS_AS(mc_count_moments(p, t, Priors{0.5}, NoiseParams{}, 9'999, rng), DomainError);
}

TEST_CASE("memoryless signal shifts the mean by the expected arrivals", "[montecarlo]") {
    RngConfig rng;
    const PulseShape p{{120, 80, 40}, 0.01};
    ArrivalTable t(3, 0);
    t.set_presence(1, 0, 0.4);
    t.set_presence(1, 1, 0.25);
    t.set_presence(1, 2, 0.1);
    const auto m = mc_count_moments(p, t, Priors{0.5}, NoiseParams{100, 100}, 300'000, rng);
    const double expected = 120 * 0.4 + 80 * 0.25 + 40 * 0.1;
    const double se = std::hypot(m.mean0.std_error, m.mean1.std_error);
    CHECK(std::abs((m.mean1.value - m.mean0.value) - expected) < 3 * se);
}

TEST_CASE("link simulator limits", "[montecarlo]") {
    RngConfig rng;
    const auto silent = j0_scenario(0, {100, 100});
    const auto quiet = mc_link_ber(silent, 0.005, 100'000, rng);
    CHECK(std::abs(quiet.value - 0.5) < 4 * quiet.std_error);

    auto loud = j0_scenario(0, {100, 100});
    loud.relay = {{40 * um, 2 * um, 2 * um}, 50 * um};
    loud.destination = {{80 * um, 4 * um, 4 * um}, 50 * um};
    loud.source_pulse = make_pulse(ShapeFamily::uniform(), 4, 2'000'000, 0.005);
    loud.relay_pulse = loud.source_pulse;
    CHECK(mc_link_ber(loud, 0.005, 100'000, rng).value == 0.0);
    CHECK_THROWS_AS(mc_link_ber(loud, 0.005, 999, rng), DomainError);
}

TEST_CASE("moderate-BER link matches the closed form", "[montecarlo][oracle]") {
    RngConfig rng;
    const auto sc = j0_scenario(80000, {100, 100});
    const double analytic = evaluate_link(sc, 0.005, false).pe_relay;
    REQUIRE(analytic > 0.03);
    REQUIRE(analytic < 0.1);
    const auto mc = mc_link_ber(sc, 0.005, 1'000'000, rng);
    CHECK_THAT(mc.value, WithinRel(analytic, 0.10));
}
