// SPDX-License-Identifier: Apache-2.0
#pragma once

// Composite network cost
//
//   C(v) = sum_t [ exp(alpha*x_t + beta_eff) + f(u_t) ]
//
// where x_t is the hot-spot temperature driven by the per-unit total load
// u_t = (l_t + sum_i v_{i,t}) / nominal and beta_eff is beta, or 0 when the
// intercept has been folded into a quadratic f. The cost depends on the
// profile only through the per-slot load sums, which both the analytic
// gradient and the sum-load decomposition exploit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "evsched/scenario.hpp"
#include "evsched/thermal.hpp"

namespace evsched {

struct CostBreakdown {
    double total = 0.0;
    double ageing = 0.0;     ///< sum of exp(alpha*x_t + beta_eff)
    double memoryless = 0.0; ///< sum of f(u_t)
    StateTrace trace;
};

/// Per-unit total load implied by a profile: u_t = (l_t + w_t) / nominal.
inline LoadSeries total_load(const ChargingProfile& v, const Scenario& s) {
    if (v.ev_count() != s.ev_count() || v.slot_count() != s.slot_count())
        throw DimensionError("total_load: profile is " + std::to_string(v.ev_count()) + "x" +
                             std::to_string(v.slot_count()) + " but scenario is " +
                             std::to_string(s.ev_count()) + "x" +
                             std::to_string(s.slot_count()));
    LoadSeries loads;
    loads.delta_h = s.delta_h;
    loads.slots_pu.resize(s.slot_count());
    const auto w = v.column_sums_kw();
    for (std::size_t t = 0; t < s.slot_count(); ++t)
        loads.slots_pu[t] = s.per_unit(s.nonev_kw[t] + w[t]);
    return loads;
}

/// Effective ageing intercept used inside the cost.
inline double cost_beta(const Scenario& s) {
    return s.memoryless.fold_beta ? 0.0 : s.thermal.beta;
}

/// Cost of a per-unit load series, with the state trace it induces.
inline CostBreakdown cost_of_loads(const LoadSeries& loads, const Scenario& s) {
    CostBreakdown out;
    out.trace = simulate_trace(loads, s.ambient, s.thermal, s.joule);
    const double beta_eff = cost_beta(s);
    for (std::size_t t = 0; t < loads.size(); ++t) {
        out.ageing += std::exp(s.thermal.alpha * out.trace.temps_c[t] + beta_eff);
        out.memoryless += s.memoryless(loads.slots_pu[t]);
    }
    out.total = out.ageing + out.memoryless;
    return out;
}

/// Composite cost of a charging profile.
inline CostBreakdown total_cost(const ChargingProfile& v, const Scenario& s) {
    return cost_of_loads(total_load(v, s), s);
}

/// Gradient with respect to u_s of sum_t weights[t] * x_t(u), exploiting
/// x_t = ... + b1 u_t^2 + (a b1 + b2) sum_{k<t} a^(t-k-1) u_k^2:
///
///   d/du_s = 2 u_s * (b1 * weights[s] + (a b1 + b2) * sum_{t>s} a^(t-s-1) weights[t])
inline std::vector<double> weighted_state_gradient(const std::vector<double>& u_pu,
                                                   const std::vector<double>& weights,
                                                   const ThermalParams& p) {
    const std::size_t n = u_pu.size();
    std::vector<double> grad(n, 0.0);
    const double m = p.convexity_margin();
    double tail = 0.0; // sum_{t>s} a^(t-s-1) weights[t]
    for (std::size_t s = n; s-- > 0;) {
        grad[s] = 2.0 * u_pu[s] * (p.b1 * weights[s] + m * tail);
        tail = weights[s] + p.a * tail;
    }
    return grad;
}

/// Analytic gradient dC/du_t of the composite cost in per-unit load space.
/// The gradient with respect to v_{i,t} in kW is this divided by nominal_kw,
/// identical for every EV.
inline std::vector<double> cost_gradient_loads(const LoadSeries& loads, const Scenario& s) {
    const StateTrace trace = simulate_trace(loads, s.ambient, s.thermal, s.joule);
    const double beta_eff = cost_beta(s);
    const std::size_t n = loads.size();
    std::vector<double> weights(n);
    for (std::size_t t = 0; t < n; ++t)
        weights[t] = s.thermal.alpha * std::exp(s.thermal.alpha * trace.temps_c[t] + beta_eff);
    std::vector<double> grad = weighted_state_gradient(loads.slots_pu, weights, s.thermal);
    for (std::size_t t = 0; t < n; ++t) grad[t] += s.memoryless.derivative(loads.slots_pu[t]);
    return grad;
}

struct ConvexityCheck {
    bool convex = false;
    double margin = 0.0; ///< a*b1 + b2
};

/// Convexity condition on the thermal parameters.
inline ConvexityCheck check_convexity(const Scenario& s) {
    const double m = s.thermal.convexity_margin();
    return {m >= 0.0, m};
}

/// Evaluates a profile against the scenario constraints.
inline ConstraintReport check_constraints(const ChargingProfile& v, const Scenario& s,
                                          const ConstraintTolerances& tol = {}) {
    ConstraintReport r;
    r.energy_slack_kwh.resize(s.ev_count());
    for (std::size_t i = 0; i < s.ev_count(); ++i)
        r.energy_slack_kwh[i] = v.delivered_kwh(i) - s.demands_kwh[i];
    for (std::size_t i = 0; i < v.ev_count(); ++i)
        for (std::size_t t = 0; t < v.slot_count(); ++t) {
            const double kw = v.at(i, t);
            r.bound_violation_kw = std::max(r.bound_violation_kw, kw - s.v_max_kw);
            r.bound_violation_kw = std::max(r.bound_violation_kw, -kw);
        }
    const StateTrace trace = simulate_trace(total_load(v, s), s.ambient, s.thermal, s.joule);
    double worst = -std::numeric_limits<double>::infinity();
    for (double x : trace.temps_c) worst = std::max(worst, x - s.thermal.x_max);
    r.temp_violation_c = worst;
    r.feasible = r.min_energy_slack_kwh() >= -tol.energy_kwh &&
                 r.bound_violation_kw <= tol.bound_kw && r.temp_violation_c <= tol.temp_c;
    return r;
}

struct FeasibilityCheck {
    bool feasible = false;
    bool energy_ok = false;    ///< S_i <= v_max * delta_h * T for every EV
    ConstraintReport uniform_report; ///< diagnostics of the uniform profile
};

/// Sufficient feasibility condition: every demand fits the per-EV energy
/// budget and the uniform profile keeps the hot spot below shutdown.
inline FeasibilityCheck check_feasibility(const Scenario& s, const ConstraintTolerances& tol = {}) {
    FeasibilityCheck out;
    out.energy_ok = true;
    const double cap = s.max_energy_per_ev_kwh();
    for (double demand : s.demands_kwh)
        if (demand > cap + tol.energy_kwh) out.energy_ok = false;
    out.uniform_report = check_constraints(uniform_profile(s), s, tol);
    out.feasible = out.energy_ok && out.uniform_report.temp_violation_c <= tol.temp_c;
    return out;
}

/// Slots where each EV charges above the threshold. The default threshold
/// filters solver zeros without masking real activity.
inline std::vector<std::vector<std::size_t>> support_sets(const ChargingProfile& v,
                                                          double eps_kw) {
    if (!(eps_kw > 0.0)) throw DomainError("support_sets: eps must be > 0");
    std::vector<std::vector<std::size_t>> sets(v.ev_count());
    for (std::size_t i = 0; i < v.ev_count(); ++i)
        for (std::size_t t = 0; t < v.slot_count(); ++t)
            if (v.at(i, t) > eps_kw) sets[i].push_back(t);
    return sets;
}

inline double default_support_eps_kw(const Scenario& s) { return 1e-6 * s.v_max_kw; }

}  // namespace evsched
