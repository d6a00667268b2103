// SPDX-License-Identifier: Apache-2.0
#pragma once

// Sequential best-response dynamics over the EVs with three response rules:
//
//   ddc  - exact convex best response over one EV's whole profile, reusing
//          the centralized projected-gradient machinery;
//   ivfa - clipped-threshold (water-filling) profile whose threshold is set
//          by bisection so the delivered energy hits S_i exactly;
//   rect - constant-power rectangular window, chosen by exhaustive search
//          over start slots.
//
// Every decision-maker minimizes the common cost over its own variables, so
// the dynamics descend an exact potential and terminate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "evsched/central.hpp"
#include "evsched/cost.hpp"
#include "evsched/scenario.hpp"

namespace evsched {

enum class BrdRule { ddc, ivfa, rect };

struct BrdConfig {
    BrdRule rule = BrdRule::ddc;
    int max_rounds = 50;
    double rel_tol = 1e-6;          ///< full-round relative cost-change stop
    std::vector<std::size_t> order; ///< update order; empty = ascending
    double rect_power_kw = 0.0;     ///< rectangular charging power; 0 = v_max
    bool rect_trim = false;         ///< trim the last window slot to hit S_i
    bool random_ties = false;       ///< seed-based tie-break among equal windows
    std::uint64_t seed = 0;
    bool store_round_profiles = false;
    SolveOptions ddc_options{};     ///< inner solver settings for the ddc rule

    void validate(const Scenario& s) const {
        if (max_rounds < 1) throw ValidationError("BrdConfig: max_rounds must be >= 1");
        if (!(rel_tol > 0.0)) throw ValidationError("BrdConfig: rel_tol must be > 0");
        const double vbar = rect_power_kw == 0.0 ? s.v_max_kw : rect_power_kw;
        if (!(vbar > 0.0 && vbar <= s.v_max_kw))
            throw ValidationError("BrdConfig: rect_power must be in (0, v_max]");
        if (!order.empty()) {
            if (order.size() != s.ev_count())
                throw ValidationError("BrdConfig: order must list every EV exactly once");
            std::vector<bool> seen(s.ev_count(), false);
            for (std::size_t i : order) {
                if (i >= s.ev_count() || seen[i])
                    throw ValidationError("BrdConfig: order must be a permutation of the EVs");
                seen[i] = true;
            }
        }
    }
};

struct BrdTrace {
    double initial_cost = 0.0;
    std::vector<double> cost_per_round;     ///< cost after each completed round
    std::vector<double> per_response_costs; ///< cost after every single response
    /// Index into per_response_costs where the descent property starts to
    /// apply: rect begins from an empty schedule, so its first round places
    /// initial strategies rather than improving existing ones.
    std::size_t descent_start_index = 0;
    int rounds_to_converge = 0;
    bool converged = false;
    std::vector<ChargingProfile> round_profiles; ///< filled when requested
};

struct BrdResult {
    SolveReport report;
    BrdTrace trace;
};

/// Base load seen by EV `ev`: non-EV demand plus every other EV's charging.
inline std::vector<double> base_load_kw(std::size_t ev, const ChargingProfile& current,
                                        const Scenario& s) {
    std::vector<double> base = s.nonev_kw;
    for (std::size_t j = 0; j < current.ev_count(); ++j) {
        if (j == ev) continue;
        for (std::size_t t = 0; t < current.slot_count(); ++t) base[t] += current.at(j, t);
    }
    return base;
}

/// Exact convex best response of one EV with the rest of the fleet frozen.
inline std::vector<double> ddc_best_response(std::size_t ev, const ChargingProfile& current,
                                             const Scenario& s, const SolveOptions& opts = {}) {
    if (s.demands_kwh[ev] > s.max_energy_per_ev_kwh() + 1e-12)
        throw InfeasibleError("EV " + std::to_string(ev) + " demand exceeds v_max*delta*T",
                              ConstraintReport{});
    const std::size_t T = s.slot_count();
    if (s.demands_kwh[ev] <= 1e-12) return std::vector<double>(T, 0.0);
    if (s.demands_kwh[ev] >= s.max_energy_per_ev_kwh() - 1e-9)
        return std::vector<double>(T, s.v_max_kw);

    detail::RowProblem prob;
    prob.s = &s;
    prob.baseline_kw = base_load_kw(ev, current, s);
    prob.demands_kwh = {s.demands_kwh[ev]};
    prob.row_cap_kw = {s.v_max_kw};
    prob.temp_constraint = opts.temp_constraint;
    detail::RowSolveResult solved = detail::solve_rows(prob, detail::interior_start(prob), opts);
    detail::saturate_energy(solved.x, prob);
    return solved.x;
}

/// Water-filling response: v_t = clip(lambda - base_t, 0, v_max) with lambda
/// fixed by bisection so the delivered energy equals S_i within 1e-9 kWh.
inline std::vector<double> ivfa_best_response(std::size_t ev, const ChargingProfile& current,
                                              const Scenario& s) {
    const std::size_t T = s.slot_count();
    const double demand = s.demands_kwh[ev];
    if (demand > s.max_energy_per_ev_kwh() + 1e-12)
        throw InfeasibleError("EV " + std::to_string(ev) + " demand exceeds v_max*delta*T",
                              ConstraintReport{});
    if (demand <= 0.0) return std::vector<double>(T, 0.0);

    const std::vector<double> base = base_load_kw(ev, current, s);
    auto fill = [&](double level) {
        std::vector<double> v(T);
        for (std::size_t t = 0; t < T; ++t)
            v[t] = std::min(std::max(level - base[t], 0.0), s.v_max_kw);
        return v;
    };
    auto energy = [&](const std::vector<double>& v) {
        double kwh = 0.0;
        for (double kw : v) kwh += kw;
        return kwh * s.delta_h;
    };

    const auto [lo_it, hi_it] = std::minmax_element(base.begin(), base.end());
    double lo = *lo_it;
    double hi = *hi_it + s.v_max_kw + demand / (s.delta_h * static_cast<double>(T));
    std::vector<double> v = fill(hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        v = fill(mid);
        const double err = energy(v) - demand;
        if (std::abs(err) <= 1e-10) return v;
        if (err > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    v = fill(hi); // hi side always delivers at least the demand
    if (std::abs(energy(v) - demand) > 1e-9)
        throw ConvergenceError("water-filling threshold bisection did not close the energy gap");
    return v;
}

/// Rectangular response: charge at vbar over a contiguous window of minimal
/// length; the start slot minimizing the common cost wins, earliest first.
inline std::vector<double> rect_best_response(std::size_t ev, const ChargingProfile& current,
                                              const Scenario& s, double vbar_kw,
                                              bool trim = false,
                                              std::mt19937_64* tie_rng = nullptr) {
    const std::size_t T = s.slot_count();
    const double demand = s.demands_kwh[ev];
    if (demand <= 0.0) return std::vector<double>(T, 0.0);
    if (!(vbar_kw > 0.0 && vbar_kw <= s.v_max_kw))
        throw ValidationError("rect_best_response: vbar must be in (0, v_max]");
    const double slot_kwh = vbar_kw * s.delta_h;
    const auto window = static_cast<std::size_t>(std::ceil(demand / slot_kwh - 1e-12));
    if (window > T)
        throw InfeasibleError("EV " + std::to_string(ev) +
                                  " demand does not fit a rectangular window",
                              ConstraintReport{});

    const std::vector<double> base = base_load_kw(ev, current, s);
    const double tail_kw = trim ? (demand - slot_kwh * static_cast<double>(window - 1)) / s.delta_h
                                : vbar_kw;

    double best_cost = detail::kInf;
    std::vector<std::size_t> best_starts;
    LoadSeries loads;
    loads.delta_h = s.delta_h;
    loads.slots_pu.resize(T);
    for (std::size_t start = 0; start + window <= T; ++start) {
        for (std::size_t t = 0; t < T; ++t) {
            double kw = base[t];
            if (t >= start && t < start + window) kw += (t + 1 == start + window) ? tail_kw : vbar_kw;
            loads.slots_pu[t] = s.per_unit(kw);
        }
        const double c = cost_of_loads(loads, s).total;
        if (c < best_cost - 1e-15) {
            best_cost = c;
            best_starts = {start};
        } else if (tie_rng && std::abs(c - best_cost) <= 1e-15) {
            best_starts.push_back(start);
        }
    }
    std::size_t start = best_starts.front();
    if (tie_rng && best_starts.size() > 1) {
        std::uniform_int_distribution<std::size_t> pick(0, best_starts.size() - 1);
        start = best_starts[pick(*tie_rng)];
    }
    std::vector<double> v(T, 0.0);
    for (std::size_t t = start; t < start + window; ++t)
        v[t] = (t + 1 == start + window) ? tail_kw : vbar_kw;
    return v;
}

/// Runs sequential best-response dynamics until the full-round cost change
/// drops below rel_tol (or, for rect, no EV moves) or max_rounds is reached.
inline BrdResult brd_run(const Scenario& s, const BrdConfig& cfg, const ChargingProfile& init) {
    s.validate();
    cfg.validate(s);
    if (cfg.rule == BrdRule::ddc) {
        const ConvexityCheck cx = check_convexity(s);
        if (!cx.convex)
            throw NonConvexError("ddc requires a*b1 + b2 >= 0, got " + std::to_string(cx.margin));
    }
    const std::size_t T = s.slot_count();
    const std::size_t I = s.ev_count();

    ChargingProfile profile(I, T, s.delta_h);
    if (cfg.rule == BrdRule::rect) {
        // all EVs start unscheduled; round 1 places initial windows
    } else {
        if (init.ev_count() != I || init.slot_count() != T)
            throw DimensionError("brd_run: init profile does not match the scenario");
        const ConstraintReport r = check_constraints(init, s);
        if (r.min_energy_slack_kwh() < -ConstraintTolerances{}.energy_kwh ||
            r.bound_violation_kw > ConstraintTolerances{}.bound_kw)
            throw InfeasibleError("brd_run: init profile violates per-EV constraints", r);
        profile = init;
    }

    std::vector<std::size_t> order = cfg.order;
    if (order.empty()) {
        order.resize(I);
        for (std::size_t i = 0; i < I; ++i) order[i] = i;
    }
    std::mt19937_64 rng(cfg.seed);
    const double vbar = cfg.rect_power_kw == 0.0 ? s.v_max_kw : cfg.rect_power_kw;

    BrdResult out;
    BrdTrace& trace = out.trace;
    trace.initial_cost = total_cost(profile, s).total;
    trace.descent_start_index = cfg.rule == BrdRule::rect ? I : 0;

    double prev_round_cost = trace.initial_cost;
    double last_cost = trace.initial_cost;
    for (int round = 1; round <= cfg.max_rounds; ++round) {
        bool any_change = false;
        for (std::size_t ev : order) {
            std::vector<double> response;
            try {
                switch (cfg.rule) {
                case BrdRule::ddc:
                    response = ddc_best_response(ev, profile, s, cfg.ddc_options);
                    break;
                case BrdRule::ivfa:
                    response = ivfa_best_response(ev, profile, s);
                    break;
                case BrdRule::rect:
                    response = rect_best_response(ev, profile, s, vbar, cfg.rect_trim,
                                                  cfg.random_ties ? &rng : nullptr);
                    break;
                }
            } catch (const InfeasibleError& e) {
                throw InfeasibleError("best response failed for EV " + std::to_string(ev) +
                                          ": " + e.what(),
                                      e.report());
            } catch (const Error& e) {
                throw Error("best response failed for EV " + std::to_string(ev) + ": " +
                            e.what());
            }
            for (std::size_t t = 0; t < T; ++t) {
                if (profile.at(ev, t) != response[t]) {
                    any_change = true;
                    break;
                }
            }
            if (cfg.rule == BrdRule::ddc) {
                // the previous profile is itself in the strategy set; keep it
                // when the inner solve lands a hair above it
                ChargingProfile candidate = profile;
                candidate.set_row(ev, response);
                const double cand_cost = total_cost(candidate, s).total;
                if (cand_cost <= last_cost) {
                    profile = std::move(candidate);
                    last_cost = cand_cost;
                }
            } else {
                profile.set_row(ev, response);
                last_cost = total_cost(profile, s).total;
            }
            trace.per_response_costs.push_back(last_cost);
        }
        trace.cost_per_round.push_back(last_cost);
        if (cfg.store_round_profiles) trace.round_profiles.push_back(profile);
        trace.rounds_to_converge = round;

        if (cfg.rule == BrdRule::rect && !any_change) {
            trace.converged = true;
            break;
        }
        const bool comparable = cfg.rule != BrdRule::rect || round >= 2;
        if (comparable &&
            std::abs(last_cost - prev_round_cost) <= cfg.rel_tol * std::max(1.0, std::abs(prev_round_cost))) {
            trace.converged = true;
            break;
        }
        prev_round_cost = last_cost;
    }

    out.report.profile = std::move(profile);
    out.report.cost = total_cost(out.report.profile, s);
    out.report.constraints = check_constraints(out.report.profile, s);
    out.report.converged = trace.converged;
    out.report.iterations = trace.rounds_to_converge;
    return out;
}

/// Convenience entry point: uniform start for ddc/ivfa, empty start for rect.
inline BrdResult brd_run(const Scenario& s, const BrdConfig& cfg) {
    if (cfg.rule == BrdRule::rect)
        return brd_run(s, cfg, ChargingProfile(s.ev_count(), s.slot_count(), s.delta_h));
    return brd_run(s, cfg, uniform_profile(s));
}

}  // namespace evsched
