// SPDX-License-Identifier: Apache-2.0
#pragma once

// Policy evaluation: lifetime, peak temperature, Joule energy, composite
// cost, shutdown flag and undelivered energy for one profile on one scenario.
// Evaluation always uses the scenario's true non-EV demand; planning under a
// noisy forecast happens upstream.

#include <algorithm>
#include <cstddef>

#include "evsched/cost.hpp"
#include "evsched/scenario.hpp"
#include "evsched/thermal.hpp"

namespace evsched {

struct PolicyMetrics {
    double lifetime_years = 0.0;
    double peak_temp_c = 0.0;
    double total_joule_kwh = 0.0;
    double total_cost = 0.0;
    bool shutdown_violated = false;
    double energy_shortfall_kwh = 0.0; ///< sum over EVs of undelivered energy
};

inline PolicyMetrics evaluate(const ChargingProfile& v, const Scenario& s) {
    const CostBreakdown cost = total_cost(v, s);
    PolicyMetrics m;
    m.lifetime_years = lifetime_years(cost.trace.faa);
    m.peak_temp_c = cost.trace.peak_temp_c();
    m.total_joule_kwh = cost.trace.total_joule_kwh();
    m.total_cost = cost.total;
    for (double x : cost.trace.temps_c)
        if (x > s.thermal.x_max) m.shutdown_violated = true;
    for (std::size_t i = 0; i < s.ev_count(); ++i)
        m.energy_shortfall_kwh += std::max(0.0, s.demands_kwh[i] - v.delivered_kwh(i));
    return m;
}

}  // namespace evsched
