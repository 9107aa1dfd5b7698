#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>

#include "mcvd/energy.hpp"
#include "mcvd/modulation.hpp"

using namespace mcvd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("vesicle radius", "[energy]") {
    CHECK_THAT(vesicle_radius(1, 2.5e-9), WithinRel(4.330127e-9, 1e-6));
    CHECK_THAT(vesicle_radius(1000, 2.5e-9), WithinRel(43.30127e-9, 1e-6));
    CHECK_THROWS_AS(vesicle_radius(0, 2.5e-9), DomainError);
    CHECK_THROWS_AS(vesicle_radius(5, 0.0), DomainError);
}

TEST_CASE("vesicle capacity inverts the radius", "[energy]") {
    CHECK_THAT(vesicle_capacity(2.5e-9 * std::numbers::sqrt3, 2.5e-9), WithinRel(1.0, 1e-14));
    CHECK_THAT(vesicle_capacity(43.30127e-9, 2.5e-9), WithinRel(1000.0, 1e-6));
    for (std::int64_t g : {1LL, 2LL, 17LL, 1000LL, 27264LL, 1000000LL})
        CHECK_THAT(vesicle_capacity(vesicle_radius(g, 2.5e-9), 2.5e-9), WithinRel(static_cast<double>(g), 1e-12));
    CHECK_THROWS_AS(vesicle_capacity(-1.0, 2.5e-9), DomainError);
}

TEST_CASE("per-molecule synthesis cost", "[energy]") {
    const EnergyParams e;
    const auto one = subslot_energy(1, e);
    CHECK_THAT(one.synthesis, WithinRel(10144.0 * kZeptojoule, 1e-12));
    CHECK_THAT(subslot_energy(1000, e).synthesis, WithinRel(10144000.0 * kZeptojoule, 1e-12));
}

TEST_CASE("carry cost uses the transmitter radius in nanometers", "[energy]") {
    const EnergyParams e;
    CHECK_THAT(carry_energy(e), WithinRel(51875.0 * kZeptojoule, 1e-14));
    EnergyParams odd = e;
    odd.r_unit_nm = 10001;  // 625.06 steps round up
    CHECK_THAT(carry_energy(odd), WithinRel(83.0 * 626 * kZeptojoule, 1e-14));
}

TEST_CASE("empty sub-slots cost nothing", "[energy]") {
    const auto z = subslot_energy(0, EnergyParams{});
    CHECK(z.total == 0.0);
    CHECK(z.synthesis == 0.0);
    CHECK(z.vesicle == 0.0);
    CHECK(z.carry == 0.0);
    CHECK(z.release == 0.0);
    CHECK(total_energy(PulseShape{std::vector<std::int64_t>(10, 0), 0.018}, EnergyParams{}) == 0.0);
    CHECK_THROWS_AS(subslot_energy(-1, EnergyParams{}), DomainError);
}

TEST_CASE("uniform 1000-per-sub-slot pulse energy", "[energy][oracle]") {
    // 10 x (10,144,000 + 415 * 4 pi * 1875 + 51,875 + 830) zJ, evaluated in extended precision
    // ahead of time.
    const auto pulse = make_pulse(ShapeFamily::uniform(), 10, 10000, 0.018);
    CHECK_THAT(total_energy(pulse, EnergyParams{}), WithinRel(199749121.342982314547 * kZeptojoule, 1e-12));
    const auto b = subslot_energy(1000, EnergyParams{});
    CHECK_THAT(b.vesicle, WithinRel(9778207.13429823145 * kZeptojoule, 1e-12));
}

TEST_CASE("single sub-slot pulse equals its sub-slot energy", "[energy]") {
    const PulseShape p{{0, 0, 4321, 0}, 0.01};
    CHECK(total_energy(p, EnergyParams{}) == subslot_energy(4321, EnergyParams{}).total);
}

TEST_CASE("breakdown is additive", "[energy][property]") {
    for (std::int64_t g : {1LL, 3LL, 100LL, 5000LL, 123456LL}) {
        const auto b = subslot_energy(g, EnergyParams{});
        CHECK(b.total == b.synthesis + b.vesicle + b.carry + b.release);
    }
}

TEST_CASE("energy strictly increases with any sub-slot count", "[energy][property]") {
    const EnergyParams e;
    PulseShape p{{5, 0, 100, 2000}, 0.01};
    double previous = total_energy(p, e);
    for (int step = 0; step < 40; ++step) {
        p.counts[static_cast<std::size_t>(step % 4)] += 1 + step;
        const double now = total_energy(p, e);
        CHECK(now > previous);
        previous = now;
    }
}

TEST_CASE("vesicle cost orders by the sum of g^(2/3)", "[energy][property]") {
    const EnergyParams e;
    const std::vector<PulseShape> pulses{make_pulse(ShapeFamily::uniform(), 10, 10000, 1),
                                         make_pulse(ShapeFamily::exponential(), 10, 10000, 1),
                                         make_pulse(ShapeFamily::sinc(), 10, 10000, 1),
                                         make_pulse(ShapeFamily::cosine(), 10, 10000, 1),
                                         PulseShape{{10000, 0, 0, 0, 0, 0, 0, 0, 0, 0}, 1}};
    auto vesicle = [&](const PulseShape& p) {
        double v = 0;
        for (auto g : p.counts) v += subslot_energy(g, e).vesicle;
        return v;
    };
    auto moment = [](const PulseShape& p) {
        double s = 0;
        for (auto g : p.counts) s += std::pow(static_cast<double>(g), 2.0 / 3.0);
        return s;
    };
    const double scale = e.e_sy * 4 * std::numbers::pi * 3 * 2.5 * 2.5;
    for (const auto& a : pulses) {
        CHECK_THAT(vesicle(a), WithinRel(scale * moment(a), 1e-12));
        for (const auto& b : pulses) CHECK((vesicle(a) < vesicle(b)) == (moment(a) < moment(b)));
    }
}

TEST_CASE("energy parameter validation", "[energy]") {
    EnergyParams e;
    e.n_aa = 1;
    CHECK_THROWS_AS(e.validate(), DomainError);
    e = EnergyParams{};
    e.e_sy = 0;
    CHECK_THROWS_AS(subslot_energy(1, e), DomainError);
}
