#include "catch_amalgamated.hpp"

#include <cmath>
#include <limits>

#include "mcvd/ber.hpp"
#include "mcvd/experiment.hpp"

using namespace mcvd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LinkStats stats(double mu0, double var0, double mu1, double var1, double tau) {
    LinkStats s;
    s.mu0 = mu0;
    s.var0 = var0;
    s.mu1 = mu1;
    s.var1 = var1;
    s.threshold = tau;
    return s;
}

LinkStats mirrored(const LinkStats& s) { return stats(-s.mu0, s.var0, -s.mu1, s.var1, -*s.threshold); }

}  // namespace

TEST_CASE("direct BER limits", "[ber]") {
    CHECK(direct_ber(stats(100, 200, 400, 500, -kInf)).p_e == 0.5);
    CHECK(direct_ber(stats(100, 200, 100, 200, 150)).p_e == 0.5);
    CHECK(direct_ber(stats(100, 1, 10000, 1, 5050)).p_e < 1e-10);
    CHECK(direct_ber(stats(100, 1, 10000, 1, 5050)).mode == LinkMode::direct);
    LinkStats unset;
    unset.var0 = unset.var1 = 1;
    CHECK_THROWS_AS(direct_ber(unset), StateError);
}

TEST_CASE("relay BER limits", "[ber]") {
    const auto sharp = stats(100, 1, 10000, 1, 5050);
    const auto blunt = stats(100, 200, 100, 200, 300);
    CHECK(relay_ber(sharp, sharp).p_e == 0.0);
    CHECK(relay_ber(sharp, blunt).p_e == 0.5);
    CHECK(relay_ber(blunt, sharp).p_e == 0.5);
    CHECK(relay_ber(sharp, sharp).mode == LinkMode::relay);
    LinkStats unset;
    CHECK_THROWS_AS(relay_ber(sharp, unset), StateError);
}

TEST_CASE("relay BER is unchanged when both brackets flip sign", "[ber][property]") {
    for (int k = 0; k < 30; ++k) {
        const auto sr = stats(100 + k, 150 + 3 * k, 160 + 4 * k, 220 + 5 * k, 125 + 2 * k);
        const auto rd = stats(90 + 2 * k, 130 + k, 170 + 3 * k, 260 + 2 * k, 120 + 3 * k);
        CHECK_THAT(relay_ber(mirrored(sr), mirrored(rd)).p_e, WithinAbs(relay_ber(sr, rd).p_e, 1e-15));
        const double one_flipped = relay_ber(mirrored(sr), rd).p_e;
        CHECK_THAT(one_flipped, WithinAbs(1.0 - relay_ber(sr, rd).p_e, 1e-15));
    }
}

TEST_CASE("equiprobable relay BER equals the decode-and-forward chain", "[ber][property]") {
    for (int k = 0; k < 30; ++k) {
        const auto sr = stats(100 + k, 150 + 3 * k, 160 + 4 * k, 220 + 5 * k, 125 + 2 * k);
        const auto rd = stats(90 + 2 * k, 130 + k, 170 + 3 * k, 260 + 2 * k, 120 + 3 * k);
        CHECK_THAT(relay_ber_exact_chain(sr, rd, Priors{0.5}), WithinAbs(relay_ber(sr, rd).p_e, 1e-14));
    }
}

TEST_CASE("success probability", "[ber]") {
    CHECK(success_probability(0.0) == 1.0);
    CHECK(success_probability(0.5) == 0.0);
    CHECK_THAT(success_probability(0.7), WithinAbs(0.4, 1e-15));
    CHECK_THAT(success_probability(0.3), WithinAbs(0.4, 1e-15));
    CHECK_THAT(success_probability(0.1, 3), WithinRel(0.512, 1e-14));
    CHECK_THROWS_AS(success_probability(1.5), DomainError);
    CHECK_THROWS_AS(success_probability(0.1, 0), DomainError);
}

TEST_CASE("success probability falls as the error rate nears one half", "[ber][property]") {
    double previous = 2.0;
    for (int k = 0; k <= 500; ++k) {
        const double p = 0.001 * k;
        const double s = success_probability(p);
        CHECK(s <= previous);
        CHECK_THAT(success_probability(1.0 - p), WithinAbs(s, 1e-14));
        previous = s;
    }
}

TEST_CASE("baseline operating point reaches a BER near 1e-5", "[ber][reference][!shouldfail]") {
    ScenarioSpec spec;  // exponential pulse, 1000 fJ, relay (100,12,14) um, t_s = 18 ms
    const auto ev = evaluate_link(spec.link(), 0.018);
    INFO("relay BER " << ev.pe_relay << ", ISI mean " << ev.stats_sr.isi_mean << ", signal "
                      << ev.stats_sr.signal_mean);
    CHECK(std::abs(std::log10(ev.pe_relay) + 5.0) <= 1.0);
}
