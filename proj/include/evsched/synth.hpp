// SPDX-License-Identifier: Apache-2.0
#pragma once

// Synthetic non-EV demand and ambient-temperature generator. The evening-peak
// shape is a smooth two-bump residential day (main bump near 19:30, smaller
// one near 07:30) scaled so that 30 households peak around 0.9 per-unit of a
// 90 kW transformer; a small seeded jitter decorrelates instances.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "evsched/thermal.hpp"

namespace evsched {

enum class DemandShape { evening_peak, flat };

struct SynthSeries {
    std::vector<double> nonev_kw;
    AmbientSeries ambient;
};

namespace detail {

/// Circular distance between clock hours, in [0, 12].
inline double hour_distance(double h1, double h2) {
    double d = std::fmod(std::abs(h1 - h2), 24.0);
    return std::min(d, 24.0 - d);
}

inline double gaussian_bump(double hour, double center, double width) {
    const double d = hour_distance(hour, center) / width;
    return std::exp(-0.5 * d * d);
}

/// Per-household demand in kW at a clock hour; peaks at about 2.7 kW.
inline double household_kw(double hour) {
    return 0.35 + 2.35 * gaussian_bump(hour, 19.5, 1.6) + 1.1 * gaussian_bump(hour, 7.5, 1.5);
}

/// Ambient temperature in degC at a clock hour; warmest mid-afternoon.
inline double ambient_c(double hour) {
    return 11.0 + 6.0 * std::cos(2.0 * std::numbers::pi * (hour - 14.5) / 24.0);
}

}  // namespace detail

/// Generates `slots` half-hour-style slots starting at `start_hour` o'clock.
inline SynthSeries synth_demand(DemandShape shape, std::size_t households, std::uint64_t seed,
                                std::size_t slots = 30, double delta_h = 0.5,
                                double start_hour = 17.0) {
    SynthSeries out;
    out.nonev_kw.resize(slots);
    out.ambient.slots_c.resize(slots);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.02, 0.02);
    for (std::size_t t = 0; t < slots; ++t) {
        const double hour =
            std::fmod(start_hour + (static_cast<double>(t) + 0.5) * delta_h, 24.0);
        if (shape == DemandShape::flat) {
            out.nonev_kw[t] = static_cast<double>(households) * 1.0;
            out.ambient.slots_c[t] = 15.0;
        } else {
            out.nonev_kw[t] = static_cast<double>(households) * detail::household_kw(hour) *
                              (1.0 + jitter(rng));
            out.ambient.slots_c[t] = detail::ambient_c(hour) + 0.2 * jitter(rng) * 50.0;
        }
    }
    return out;
}

}  // namespace evsched
