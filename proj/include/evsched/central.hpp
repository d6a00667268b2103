// SPDX-License-Identifier: Apache-2.0
#pragma once

// Centralized solvers for the convex charging problem.
//
// solve_centralized minimizes C over the full I x T profile; solve_sum_load
// minimizes over the T aggregate loads w_t (unique by strict convexity), and
// allocate splits an aggregate back into per-EV rows, proportionally when the
// split respects v_max and through a max-flow repair otherwise.
//
// Box constraints are handled by projection; the per-EV energy requirement
// and the optional hot-spot ceiling go through a log barrier whose parameter
// decreases geometrically from 1 to 1e-8. The energy constraint is known to
// saturate at the optimum and is verified to do so.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "evsched/cost.hpp"
#include "evsched/scenario.hpp"

namespace evsched {

struct SolveOptions {
    /// Projected-gradient residual tolerance in kW. Cost suboptimality scales
    /// with the square of this; 1e-5 keeps costs accurate to ~1e-8 while
    /// staying above the double-precision line-search floor of badly scaled
    /// instances. Tighten it on well-conditioned problems when positional
    /// accuracy matters.
    double kkt_tol = 1e-5;
    int max_iters = 20000; ///< inner iteration cap per barrier stage
    bool temp_constraint = true; ///< enforce x_t <= x_max
    std::uint64_t seed = 0;      ///< reserved for randomized restarts
};

struct SumLoadProfile {
    std::vector<double> w_kw; ///< aggregate EV power per slot
};

struct SolveReport {
    ChargingProfile profile;
    CostBreakdown cost;
    ConstraintReport constraints;
    double kkt_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> stage_costs; ///< objective after each barrier stage
};

/// allocate() could not route the requested energy through the slot/EV
/// network; carries the missing amount in kWh.
class AllocationError : public Error {
public:
    AllocationError(const std::string& what, double gap_kwh)
        : Error(what + " (gap " + std::to_string(gap_kwh) + " kWh)"), gap_kwh_(gap_kwh) {}

    [[nodiscard]] double gap_kwh() const { return gap_kwh_; }

private:
    double gap_kwh_;
};

namespace detail {

constexpr double kBarrierMu0 = 1.0;
constexpr double kBarrierFactor = 0.2;
constexpr double kBarrierMuMin = 1e-8;
constexpr double kInf = std::numeric_limits<double>::infinity();

/// Barrier-augmented objective over a group of EV rows with everything else
/// folded into a fixed baseline load. Layout of x: row-major, one row of T
/// entries per optimized EV.
struct RowProblem {
    const Scenario* s = nullptr;
    std::vector<double> baseline_kw;  ///< non-EV demand plus frozen EV rows
    std::vector<double> demands_kwh;  ///< S_i of the optimized rows
    std::vector<double> row_cap_kw;   ///< upper box bound per row
    bool temp_constraint = true;
    double mu = kBarrierMu0;
    /// The hot-spot barrier keeps its own floor: any mu keeps the iterate
    /// strictly feasible, while mu below ~1e-6 makes the barrier curvature
    /// at a binding ceiling exceed what double precision can line-search.
    double mu_temp = kBarrierMu0;

    [[nodiscard]] std::size_t rows() const { return demands_kwh.size(); }
    [[nodiscard]] std::size_t slots() const { return baseline_kw.size(); }
    [[nodiscard]] std::size_t dim() const { return rows() * slots(); }

    /// Objective value; +inf outside the barrier domain. When `grad` is
    /// non-null it is filled with the gradient (undefined on +inf).
    double eval(const std::vector<double>& x, std::vector<double>* grad) const {
        const std::size_t T = slots();
        const std::size_t R = rows();
        const double delta = s->delta_h;

        LoadSeries loads;
        loads.delta_h = delta;
        loads.slots_pu.resize(T);
        for (std::size_t t = 0; t < T; ++t) {
            double kw = baseline_kw[t];
            for (std::size_t r = 0; r < R; ++r) kw += x[r * T + t];
            loads.slots_pu[t] = s->per_unit(kw);
        }

        std::vector<double> slack(R);
        for (std::size_t r = 0; r < R; ++r) {
            double kwh = 0.0;
            for (std::size_t t = 0; t < T; ++t) kwh += x[r * T + t];
            slack[r] = kwh * delta - demands_kwh[r];
            if (!(slack[r] > 0.0)) return kInf;
        }

        const StateTrace trace = simulate_trace(loads, s->ambient, s->thermal, s->joule);
        const double beta_eff = cost_beta(*s);
        double value = 0.0;
        std::vector<double> weights(T);
        for (std::size_t t = 0; t < T; ++t) {
            const double ageing = std::exp(s->thermal.alpha * trace.temps_c[t] + beta_eff);
            value += ageing + s->memoryless(loads.slots_pu[t]);
            weights[t] = s->thermal.alpha * ageing;
        }
        for (std::size_t r = 0; r < R; ++r) value -= mu * std::log(slack[r]);
        if (temp_constraint) {
            for (std::size_t t = 0; t < T; ++t) {
                const double headroom = s->thermal.x_max - trace.temps_c[t];
                if (!(headroom > 0.0)) return kInf;
                value -= mu_temp * std::log(headroom);
                weights[t] += mu_temp / headroom;
            }
        }
        if (!std::isfinite(value)) return kInf;

        if (grad) {
            grad->assign(dim(), 0.0);
            std::vector<double> du = weighted_state_gradient(loads.slots_pu, weights, s->thermal);
            for (std::size_t t = 0; t < T; ++t)
                du[t] += s->memoryless.derivative(loads.slots_pu[t]);
            for (std::size_t r = 0; r < R; ++r) {
                const double energy_pull = mu * delta / slack[r];
                for (std::size_t t = 0; t < T; ++t)
                    (*grad)[r * T + t] = du[t] / s->nominal_kw - energy_pull;
            }
        }
        return value;
    }
};

struct PgdResult {
    std::vector<double> x;
    double residual = kInf;
    int iterations = 0;
};

/// Spectral projected gradient on the box [0, cap_r] per row: Barzilai-Borwein
/// step lengths safeguarded by a non-monotone Armijo backtracking line search.
/// Stops on the unit-step projected-gradient residual.
inline PgdResult pgd_minimize(const RowProblem& prob, std::vector<double> x, int max_iters,
                              double tol) {
    const std::size_t T = prob.slots();
    auto clip = [&](std::size_t idx, double value) {
        const double cap = prob.row_cap_kw[idx / T];
        return std::min(std::max(value, 0.0), cap);
    };

    PgdResult out;
    std::vector<double> grad, grad_next, xn(x.size());
    double f = prob.eval(x, &grad);
    if (!std::isfinite(f))
        throw ConvergenceError("projected gradient: start point outside barrier domain");

    std::deque<double> recent{f}; // non-monotone reference window
    double grad_inf = 0.0;
    for (double g : grad) grad_inf = std::max(grad_inf, std::abs(g));
    double spectral = grad_inf > 0.0 ? 1.0 / grad_inf : 1.0;

    for (int iter = 0; iter < max_iters; ++iter) {
        double residual = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k)
            residual = std::max(residual, std::abs(x[k] - clip(k, x[k] - grad[k])));
        out.residual = residual;
        out.iterations = iter;
        if (residual <= tol) break;

        const double f_ref = *std::max_element(recent.begin(), recent.end());
        double step = std::min(std::max(spectral, 1e-12), 1e10);
        bool accepted = false;
        double fn = kInf;
        for (int ls = 0; ls < 80; ++ls) {
            double directional = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) {
                xn[k] = clip(k, x[k] - step * grad[k]);
                directional += grad[k] * (xn[k] - x[k]);
            }
            if (directional >= 0.0) { // projection blocked every coordinate
                step *= 0.5;
                continue;
            }
            fn = prob.eval(xn, nullptr);
            // the absolute term keeps the search alive once objective
            // differences fall below double rounding
            if (fn <= f_ref + 1e-4 * directional + 1e-14 * (1.0 + std::abs(f_ref))) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // rounding floor reached; residual reported as-is

        fn = prob.eval(xn, &grad_next);
        double ss = 0.0, sy = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double s = xn[k] - x[k];
            const double y = grad_next[k] - grad[k];
            ss += s * s;
            sy += s * y;
        }
        spectral = sy > 1e-300 ? ss / sy : 1e6;
        x.swap(xn);
        grad.swap(grad_next);
        f = fn;
        recent.push_back(f);
        if (recent.size() > 10) recent.pop_front();
    }
    out.x = std::move(x);
    return out;
}

struct RowSolveResult {
    std::vector<double> x; ///< row-major optimized rows, kW
    double residual = kInf;
    int iterations = 0;
    std::vector<double> stage_costs;
};

/// Runs the barrier continuation over a RowProblem from a strictly interior
/// start. `x0` must satisfy every barrier constraint strictly.
inline RowSolveResult solve_rows(RowProblem prob, std::vector<double> x0,
                                 const SolveOptions& opts) {
    RowSolveResult out;
    out.x = std::move(x0);
    double mu = kBarrierMu0;
    bool last = false;
    while (true) {
        prob.mu = mu;
        prob.mu_temp = std::max(mu, 1e-5);
        const double stage_tol = last ? opts.kkt_tol : std::max(opts.kkt_tol, mu * 1e-2);
        PgdResult stage = pgd_minimize(prob, std::move(out.x), opts.max_iters, stage_tol);
        out.x = std::move(stage.x);
        out.residual = stage.residual;
        out.iterations += stage.iterations;
        out.stage_costs.push_back(prob.eval(out.x, nullptr));
        if (last) break;
        const double next = mu * kBarrierFactor;
        if (next <= kBarrierMuMin) {
            mu = kBarrierMuMin;
            last = true;
        } else {
            mu = next;
        }
    }
    if (out.residual > opts.kkt_tol)
        throw ConvergenceError("solver stalled at projected-gradient residual " +
                               std::to_string(out.residual) + " > tol " +
                               std::to_string(opts.kkt_tol));
    return out;
}

/// Strictly interior start: the uniform rate inflated until both the energy
/// slack and (when enforced) the hot-spot headroom are strictly positive.
inline std::vector<double> interior_start(const RowProblem& prob) {
    const std::size_t T = prob.slots();
    const std::size_t R = prob.rows();
    const double delta = prob.s->delta_h;
    for (double inflate : {1.05, 1.02, 1.01, 1.003, 1.001, 1.0001, 1.00001}) {
        std::vector<double> x(prob.dim());
        bool interior = true;
        for (std::size_t r = 0; r < R; ++r) {
            const double cap = prob.row_cap_kw[r];
            const double uniform = prob.demands_kwh[r] / (delta * static_cast<double>(T));
            const double level = std::min(uniform * inflate, cap);
            if (!(level * delta * static_cast<double>(T) > prob.demands_kwh[r])) {
                interior = false;
                break;
            }
            for (std::size_t t = 0; t < T; ++t) x[r * T + t] = level;
        }
        if (!interior) continue;
        if (std::isfinite(prob.eval(x, nullptr))) return x;
    }
    throw InfeasibleError("no strictly interior starting point exists", ConstraintReport{});
}

/// Largest-shift projection of `w` onto {sum(w)*delta == target_kwh} within
/// [0, cap]: bisection on a common additive shift, then a one-slot touch-up.
inline void project_to_exact_energy(std::span<double> w, double cap_kw, double delta_h,
                                    double target_kwh) {
    const double total = [&] {
        double kwh = 0.0;
        for (double v : w) kwh += v;
        return kwh * delta_h;
    }();
    auto energy_at = [&](double shift) {
        double kwh = 0.0;
        for (double v : w) kwh += std::min(std::max(v + shift, 0.0), cap_kw);
        return kwh * delta_h;
    };
    if (std::abs(total - target_kwh) > 0.0) {
        double lo = -cap_kw, hi = cap_kw;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (energy_at(mid) >= target_kwh)
                hi = mid;
            else
                lo = mid;
        }
        for (double& v : w) v = std::min(std::max(v + hi, 0.0), cap_kw);
    }
    // absorb the bisection residue into slots with room
    double residue_kw = 0.0;
    for (double v : w) residue_kw += v;
    residue_kw -= target_kwh / delta_h;
    for (double& v : w) {
        const double moved = std::min(std::max(v - residue_kw, 0.0), cap_kw);
        residue_kw -= v - moved;
        v = moved;
        if (residue_kw == 0.0) break;
    }
}

/// The energy inequality must saturate at an optimum of a load-increasing
/// cost; the barrier leaves an O(mu) slack which is projected out here. A
/// slack beyond any plausible barrier residue fails loudly instead.
inline void saturate_energy(std::vector<double>& x, const RowProblem& prob) {
    const std::size_t T = prob.slots();
    for (std::size_t r = 0; r < prob.rows(); ++r) {
        double kwh = 0.0;
        for (std::size_t t = 0; t < T; ++t) kwh += x[r * T + t];
        const double slack = kwh * prob.s->delta_h - prob.demands_kwh[r];
        if (slack > 1e-3)
            throw ConvergenceError("energy constraint not active at optimum (slack " +
                                   std::to_string(slack) + " kWh)");
        project_to_exact_energy({x.data() + r * T, T}, prob.row_cap_kw[r], prob.s->delta_h,
                                prob.demands_kwh[r]);
    }
}

}  // namespace detail

/// Refuses non-convex parameters and scenarios failing the sufficient
/// feasibility condition; shared preamble of the centralized solvers.
inline void require_solvable(const Scenario& s) {
    s.validate();
    const ConvexityCheck cx = check_convexity(s);
    if (!cx.convex)
        throw NonConvexError("cost is non-convex: a*b1 + b2 = " + std::to_string(cx.margin) +
                             " < 0");
    const FeasibilityCheck feas = check_feasibility(s);
    if (!feas.feasible)
        throw InfeasibleError(feas.energy_ok
                                  ? "uniform profile exceeds the shutdown temperature"
                                  : "some EV demand exceeds v_max * delta_h * T",
                              feas.uniform_report);
}

/// Solves the full I x T convex problem by projected gradient with a log
/// barrier. Deterministic given the options; initialized at the (inflated)
/// uniform profile.
inline SolveReport solve_centralized(const Scenario& s, const SolveOptions& opts = {}) {
    require_solvable(s);
    const std::size_t T = s.slot_count();
    const std::size_t I = s.ev_count();
    const double cap_kwh = s.max_energy_per_ev_kwh();

    ChargingProfile profile(I, T, s.delta_h);
    std::vector<std::size_t> free_rows;
    std::vector<double> baseline = s.nonev_kw;
    for (std::size_t i = 0; i < I; ++i) {
        if (s.demands_kwh[i] <= 1e-12) {
            // zero demand: charging only raises the cost
            continue;
        }
        if (s.demands_kwh[i] >= cap_kwh - 1e-9) {
            // demand pins the whole row at v_max
            for (std::size_t t = 0; t < T; ++t) {
                profile.set(i, t, s.v_max_kw);
                baseline[t] += s.v_max_kw;
            }
            continue;
        }
        free_rows.push_back(i);
    }

    SolveReport report;
    report.converged = true;
    if (!free_rows.empty()) {
        detail::RowProblem prob;
        prob.s = &s;
        prob.baseline_kw = std::move(baseline);
        prob.temp_constraint = opts.temp_constraint;
        for (std::size_t i : free_rows) {
            prob.demands_kwh.push_back(s.demands_kwh[i]);
            prob.row_cap_kw.push_back(s.v_max_kw);
        }
        detail::RowSolveResult solved =
            detail::solve_rows(prob, detail::interior_start(prob), opts);
        detail::saturate_energy(solved.x, prob);
        for (std::size_t r = 0; r < free_rows.size(); ++r)
            profile.set_row(free_rows[r], {solved.x.data() + r * T, T});
        report.kkt_residual = solved.residual;
        report.iterations = solved.iterations;
        report.stage_costs = std::move(solved.stage_costs);
    }

    report.profile = std::move(profile);
    report.cost = total_cost(report.profile, s);
    report.constraints = check_constraints(report.profile, s);
    return report;
}

/// Solves the T-dimensional aggregate problem: minimize the cost over the
/// sum-EV load w with sum(w)*delta >= sum(S) and 0 <= w_t <= I*v_max. The
/// energy constraint saturates at the optimum and the returned aggregate is
/// polished to satisfy it with equality, so allocation is exact.
inline SumLoadProfile solve_sum_load(const Scenario& s, const SolveOptions& opts = {}) {
    require_solvable(s);
    const std::size_t T = s.slot_count();
    const double total_kwh =
        std::accumulate(s.demands_kwh.begin(), s.demands_kwh.end(), 0.0);
    SumLoadProfile out;
    out.w_kw.assign(T, 0.0);
    if (total_kwh <= 0.0 || s.ev_count() == 0) return out;

    const double cap_kw = static_cast<double>(s.ev_count()) * s.v_max_kw;
    if (total_kwh >= cap_kw * s.delta_h * static_cast<double>(T) - 1e-9) {
        out.w_kw.assign(T, cap_kw); // demand pins the aggregate everywhere
        return out;
    }
    detail::RowProblem prob;
    prob.s = &s;
    prob.baseline_kw = s.nonev_kw;
    prob.demands_kwh = {total_kwh};
    prob.row_cap_kw = {cap_kw};
    prob.temp_constraint = opts.temp_constraint;

    detail::RowSolveResult solved = detail::solve_rows(prob, detail::interior_start(prob), opts);
    detail::saturate_energy(solved.x, prob);
    out.w_kw = std::move(solved.x);
    return out;
}

namespace detail {

/// Max flow on the slot -> EV bipartite network (BFS augmenting paths).
/// Capacities are kWh; augmentation stops below 1e-12 residual resolution.
class TransportFlow {
public:
    TransportFlow(const std::vector<double>& supply_kwh, const std::vector<double>& demand_kwh,
                  double edge_cap_kwh)
        : slots_(supply_kwh.size()), evs_(demand_kwh.size()) {
        const std::size_t n = 2 + slots_ + evs_;
        adj_.resize(n);
        for (std::size_t t = 0; t < slots_; ++t) add_edge(source(), slot_node(t), supply_kwh[t]);
        for (std::size_t t = 0; t < slots_; ++t)
            for (std::size_t i = 0; i < evs_; ++i) add_edge(slot_node(t), ev_node(i), edge_cap_kwh);
        for (std::size_t i = 0; i < evs_; ++i) add_edge(ev_node(i), sink(), demand_kwh[i]);
    }

    double run() {
        double total = 0.0;
        while (true) {
            const double pushed = augment();
            if (pushed < 1e-13) break;
            total += pushed;
        }
        return total;
    }

    [[nodiscard]] double flow_kwh(std::size_t slot, std::size_t ev) const {
        // slot->ev edges were added in (t, i) order after the T source edges
        const Edge& e = edges_[2 * (slots_ + slot * evs_ + ev)];
        return e.flow;
    }

private:
    struct Edge {
        std::size_t to;
        double cap;
        double flow = 0.0;
    };

    [[nodiscard]] std::size_t source() const { return 0; }
    [[nodiscard]] std::size_t sink() const { return 1; }
    [[nodiscard]] std::size_t slot_node(std::size_t t) const { return 2 + t; }
    [[nodiscard]] std::size_t ev_node(std::size_t i) const { return 2 + slots_ + i; }

    void add_edge(std::size_t from, std::size_t to, double cap) {
        adj_[from].push_back(edges_.size());
        edges_.push_back({to, cap});
        adj_[to].push_back(edges_.size());
        edges_.push_back({from, 0.0}); // residual twin
    }

    double augment() {
        std::vector<std::size_t> parent_edge(adj_.size(), SIZE_MAX);
        std::deque<std::size_t> queue{source()};
        std::vector<bool> seen(adj_.size(), false);
        seen[source()] = true;
        while (!queue.empty() && !seen[sink()]) {
            const std::size_t node = queue.front();
            queue.pop_front();
            for (std::size_t idx : adj_[node]) {
                const Edge& e = edges_[idx];
                if (seen[e.to] || e.cap - e.flow <= 1e-13) continue;
                seen[e.to] = true;
                parent_edge[e.to] = idx;
                queue.push_back(e.to);
            }
        }
        if (!seen[sink()]) return 0.0;
        double bottleneck = kInf;
        for (std::size_t node = sink(); node != source();) {
            const Edge& e = edges_[parent_edge[node]];
            bottleneck = std::min(bottleneck, e.cap - e.flow);
            node = edges_[parent_edge[node] ^ 1].to;
        }
        for (std::size_t node = sink(); node != source();) {
            edges_[parent_edge[node]].flow += bottleneck;
            edges_[parent_edge[node] ^ 1].flow -= bottleneck;
            node = edges_[parent_edge[node] ^ 1].to;
        }
        return bottleneck;
    }

    std::size_t slots_;
    std::size_t evs_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> adj_;
};

}  // namespace detail

/// Splits an aggregate load among the EVs: proportional to demand when that
/// respects v_max everywhere, otherwise via max flow on the slot/EV network.
/// Requires the aggregate energy to match total demand within the energy
/// tolerance.
inline ChargingProfile allocate(const SumLoadProfile& w, const Scenario& s) {
    const std::size_t T = s.slot_count();
    const std::size_t I = s.ev_count();
    if (w.w_kw.size() != T)
        throw DimensionError("allocate: aggregate length != scenario slot count");
    const double total_kwh =
        std::accumulate(s.demands_kwh.begin(), s.demands_kwh.end(), 0.0);
    double agg_kwh = 0.0;
    for (double v : w.w_kw) agg_kwh += v;
    agg_kwh *= s.delta_h;
    if (std::abs(agg_kwh - total_kwh) > ConstraintTolerances{}.energy_kwh)
        throw DomainError("allocate: aggregate energy " + std::to_string(agg_kwh) +
                          " kWh != total demand " + std::to_string(total_kwh) + " kWh");

    ChargingProfile v(I, T, s.delta_h);
    if (total_kwh <= 0.0) return v;

    bool proportional_ok = true;
    for (std::size_t i = 0; i < I && proportional_ok; ++i) {
        const double share = s.demands_kwh[i] / total_kwh;
        for (std::size_t t = 0; t < T; ++t)
            if (w.w_kw[t] * share > s.v_max_kw + 1e-12) {
                proportional_ok = false;
                break;
            }
    }
    if (proportional_ok) {
        for (std::size_t i = 0; i < I; ++i) {
            const double share = s.demands_kwh[i] / total_kwh;
            for (std::size_t t = 0; t < T; ++t)
                v.set(i, t, std::min(w.w_kw[t] * share, s.v_max_kw));
        }
        return v;
    }

    std::vector<double> supply(T);
    for (std::size_t t = 0; t < T; ++t) supply[t] = w.w_kw[t] * s.delta_h;
    detail::TransportFlow flow(supply, s.demands_kwh, s.v_max_kw * s.delta_h);
    const double routed = flow.run();
    if (routed < total_kwh - ConstraintTolerances{}.energy_kwh)
        throw AllocationError("aggregate load cannot be split under the v_max cap",
                              total_kwh - routed);
    for (std::size_t i = 0; i < I; ++i)
        for (std::size_t t = 0; t < T; ++t)
            v.set(i, t, std::min(flow.flow_kwh(t, i) / s.delta_h, s.v_max_kw));
    return v;
}

/// Two-step solve: unique aggregate optimum, then allocation. The cost
/// depends on the profile only through the aggregate, so this matches
/// solve_centralized up to solver tolerance.
inline SolveReport two_step_solve(const Scenario& s, const SolveOptions& opts = {}) {
    SolveReport report;
    const SumLoadProfile w = solve_sum_load(s, opts);
    report.profile = allocate(w, s);
    report.cost = total_cost(report.profile, s);
    report.constraints = check_constraints(report.profile, s);
    report.converged = true;
    return report;
}

}  // namespace evsched
