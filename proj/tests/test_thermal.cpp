// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "evsched/thermal.hpp"

using namespace evsched;

namespace {

LoadSeries make_loads(std::vector<double> slots, double delta_h = 0.5) {
    return LoadSeries{std::move(slots), delta_h};
}

AmbientSeries make_ambient(std::size_t n, double value) {
    return AmbientSeries{std::vector<double>(n, value)};
}

/// Random instance kept in a range where double rounding stays far below the
/// 1e-9 equivalence tolerance.
struct RandomInstance {
    ThermalParams params;
    LoadSeries loads;
    AmbientSeries ambient;
};

RandomInstance random_instance(std::mt19937_64& rng, std::size_t max_slots = 100) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    RandomInstance inst;
    inst.params.a = 0.95 * unit(rng);
    inst.params.b1 = 40.0 * unit(rng);
    inst.params.b2 = -inst.params.b1 * unit(rng); // may break a*b1 + b2 >= 0; fine here
    inst.params.amb_gain = 0.3 * unit(rng);
    inst.params.amb_offset = 10.0 * unit(rng);
    inst.params.x0 = 120.0 * unit(rng);
    inst.params.u0 = 2.0 * unit(rng);
    inst.params.x_max = 150.0;
    const std::size_t n = 1 + static_cast<std::size_t>(unit(rng) * static_cast<double>(max_slots - 1));
    inst.loads.delta_h = 0.5;
    inst.loads.slots_pu.resize(n);
    inst.ambient.slots_c.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        inst.loads.slots_pu[t] = 2.0 * unit(rng);
        inst.ambient.slots_c[t] = 35.0 * unit(rng);
    }
    return inst;
}

const ThermalParams kSectionFive{}; // defaults carry the reference calibration

}  // namespace

TEST_CASE("step_temperature reproduces the nominal fixed point") {
    const double c = kSectionFive.ambient_coupling(20.0);
    CHECK(c == doctest::Approx(0.17 * (8.47 + 20.0)).epsilon(1e-14));
    const double x = step_temperature(98.0, 1.0, 1.0, c, kSectionFive);
    // independent arithmetic: 0.83*98 + 30.91 - 19.09 + 4.8399
    CHECK(x == doctest::Approx(0.83 * 98.0 + 30.91 - 19.09 + 4.8399).epsilon(1e-12));
    CHECK(std::abs(x - 98.0) < 0.01);
}

TEST_CASE("step_temperature degenerate parameter cases") {
    ThermalParams p;
    p.a = 0.0;
    p.b1 = 0.0;
    p.b2 = 0.0;
    CHECK(step_temperature(123.0, 0.7, 1.3, 4.25, p) == 4.25);

    ThermalParams decay;
    decay.a = 0.83;
    decay.b1 = 0.0;
    decay.b2 = 0.0;
    CHECK(step_temperature(100.0, 0.0, 0.0, 0.0, decay) == doctest::Approx(83.0));
}

TEST_CASE("simulate_trace single fixed-point step and nominal plateau") {
    const auto loads = make_loads({1.0});
    const auto trace = simulate_trace(loads, make_ambient(1, 20.0), kSectionFive);
    REQUIRE(trace.size() == 1);
    CHECK(std::abs(trace.temps_c[0] - 98.0) < 0.01);

    const std::size_t n = 30;
    const auto plateau =
        simulate_trace(make_loads(std::vector<double>(n, 1.0)), make_ambient(n, 20.0), kSectionFive);
    for (double x : plateau.temps_c) CHECK(std::abs(x - 98.0) < 0.01);
    for (double a : plateau.faa) CHECK(a == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("simulate_trace keeps only the u0 memory with zero loads") {
    ThermalParams p;
    p.a = 0.37;
    p.b1 = 12.0;
    p.b2 = -3.0;
    p.amb_gain = 0.0;
    p.x0 = 0.0;
    p.u0 = 1.5;
    const auto trace = simulate_trace(make_loads({0.0, 0.0}), make_ambient(2, 0.0), p);
    CHECK(trace.temps_c[0] == doctest::Approx(p.b2 * p.u0 * p.u0).epsilon(1e-14));
    CHECK(trace.temps_c[1] == doctest::Approx(p.a * p.b2 * p.u0 * p.u0).epsilon(1e-14));
}

TEST_CASE("simulate_trace rejects mismatched series") {
    CHECK_THROWS_AS(simulate_trace(make_loads({1.0, 1.0}), make_ambient(3, 20.0), kSectionFive),
                    DimensionError);
}

TEST_CASE("unroll_state base case equals one recursion step") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const auto inst = random_instance(rng, 10);
        const double direct = step_temperature(
            inst.params.x0, inst.loads.slots_pu[0], inst.params.u0,
            inst.params.ambient_coupling(inst.ambient.slots_c[0]), inst.params);
        CHECK(unroll_state(1, inst.loads, inst.ambient, inst.params) ==
              doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("unroll_state matches the recursion on random instances") {
    std::mt19937_64 rng(42);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const auto inst = random_instance(rng);
        const auto trace = simulate_trace(inst.loads, inst.ambient, inst.params);
        for (std::size_t t = 1; t <= inst.loads.size(); ++t) {
            const double g = unroll_state(t, inst.loads, inst.ambient, inst.params);
            worst = std::max(worst, std::abs(g - trace.temps_c[t - 1]));
        }
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("unroll_state stays at the nominal plateau for any slot") {
    const std::size_t n = 48;
    const auto loads = make_loads(std::vector<double>(n, 1.0));
    const auto ambient = make_ambient(n, 20.0);
    for (std::size_t t : {std::size_t{1}, std::size_t{7}, std::size_t{48}})
        CHECK(std::abs(unroll_state(t, loads, ambient, kSectionFive) - 98.0) < 0.01);
}

TEST_CASE("unroll_state rejects out-of-range slots") {
    const auto loads = make_loads({1.0, 1.0});
    const auto ambient = make_ambient(2, 20.0);
    CHECK_THROWS_AS(unroll_state(0, loads, ambient, kSectionFive), DomainError);
    CHECK_THROWS_AS(unroll_state(3, loads, ambient, kSectionFive), DomainError);
}

TEST_CASE("unroll_state is midpoint-convex in the loads when a*b1 + b2 >= 0") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        auto inst = random_instance(rng, 20);
        inst.params.b2 = -inst.params.a * inst.params.b1 * unit(rng); // force the margin >= 0
        REQUIRE(inst.params.convexity_margin() >= 0.0);
        LoadSeries other = inst.loads;
        LoadSeries mid = inst.loads;
        for (std::size_t t = 0; t < other.size(); ++t) {
            other.slots_pu[t] = 2.0 * unit(rng);
            mid.slots_pu[t] = 0.5 * (inst.loads.slots_pu[t] + other.slots_pu[t]);
        }
        for (std::size_t t = 1; t <= inst.loads.size(); ++t) {
            const double lhs = unroll_state(t, mid, inst.ambient, inst.params);
            const double rhs = 0.5 * (unroll_state(t, inst.loads, inst.ambient, inst.params) +
                                      unroll_state(t, other, inst.ambient, inst.params));
            CHECK(lhs <= rhs + 1e-9);
        }
    }
}

TEST_CASE("faa hits the nominal boundary and scales as expected") {
    CHECK(faa(-kSectionFive.beta / kSectionFive.alpha, kSectionFive) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(faa(-kSectionFive.beta / kSectionFive.alpha + std::log(2.0) / kSectionFive.alpha,
              kSectionFive) == doctest::Approx(2.0).epsilon(1e-12));

    // rounded published coefficients stay within a per-mill of 1 at 98 degC
    ThermalParams rounded = kSectionFive;
    rounded.alpha = 0.10898;
    rounded.beta = -10.68;
    CHECK(faa(98.0, rounded) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("faa is strictly increasing in temperature") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> temp(-20.0, 160.0);
    for (int rep = 0; rep < 200; ++rep) {
        double x1 = temp(rng), x2 = temp(rng);
        if (x1 == x2) continue;
        if (x1 > x2) std::swap(x1, x2);
        CHECK(faa(x1, kSectionFive) < faa(x2, kSectionFive));
    }
}

TEST_CASE("lifetime_years formula cases") {
    const std::vector<double> nominal(17, 1.0);
    CHECK(lifetime_years(nominal) == 40.0);
    const std::vector<double> doubled(5, 2.0);
    CHECK(lifetime_years(doubled) == doctest::Approx(20.0).epsilon(1e-14));
    const std::vector<double> mixed{1.0, 3.0};
    CHECK(lifetime_years(mixed) == doctest::Approx(20.0).epsilon(1e-14));
}

TEST_CASE("lifetime_years rejects empty and nonpositive series") {
    CHECK_THROWS_AS(lifetime_years(std::vector<double>{}), DomainError);
    CHECK_THROWS_AS(lifetime_years(std::vector<double>{1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(lifetime_years(std::vector<double>{-1.0}), DomainError);
}

TEST_CASE("ThermalParams validation rejects out-of-range coefficients") {
    ThermalParams p;
    p.a = 1.2;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = ThermalParams{};
    p.b2 = 0.5;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = ThermalParams{};
    p.alpha = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    CHECK_NOTHROW(ThermalParams{}.validate());
}
