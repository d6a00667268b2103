// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reference charging policies: plug-and-charge with Poisson arrival times,
// and a uniform spread over the horizon.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "evsched/scenario.hpp"

namespace evsched {

struct PacConfig {
    double arrival_mean_slots = 5.0; ///< Poisson mean of the arrival delay
    std::uint64_t seed = 0;

    void validate() const {
        if (!(arrival_mean_slots > 0.0))
            throw ValidationError("PacConfig: arrival_mean_slots must be > 0");
    }
};

/// One plug-and-charge row: full power from the arrival slot until the
/// demand is met, the last slot trimmed to land on S_i exactly. Whatever
/// does not fit before the horizon ends is simply not delivered.
inline std::vector<double> pac_row(double demand_kwh, double v_max_kw, double delta_h,
                                   std::size_t slot_count, std::size_t arrival_slot) {
    std::vector<double> row(slot_count, 0.0);
    double remaining = demand_kwh;
    for (std::size_t t = arrival_slot - 1; t < slot_count && remaining > 0.0; ++t) {
        const double kw = std::min(v_max_kw, remaining / delta_h);
        row[t] = kw;
        remaining -= kw * delta_h;
    }
    return row;
}

/// Plug-and-charge: each EV arrives at slot 1 + Poisson(mean), clamped to the
/// horizon, and charges at v_max until done. Deterministic given the seed.
inline ChargingProfile pac_policy(const Scenario& s, const PacConfig& cfg = {}) {
    s.validate();
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::poisson_distribution<long> delay(cfg.arrival_mean_slots);
    ChargingProfile v(s.ev_count(), s.slot_count(), s.delta_h);
    for (std::size_t i = 0; i < s.ev_count(); ++i) {
        const std::size_t arrival = std::min<std::size_t>(
            1 + static_cast<std::size_t>(delay(rng)), s.slot_count());
        v.set_row(i, pac_row(s.demands_kwh[i], s.v_max_kw, s.delta_h, s.slot_count(), arrival));
    }
    return v;
}

/// Uniform spread: v_{i,t} = S_i / (T * delta), clipped at v_max.
inline ChargingProfile uniform_policy(const Scenario& s) {
    s.validate();
    return uniform_profile(s);
}

}  // namespace evsched
