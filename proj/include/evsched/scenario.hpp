// SPDX-License-Identifier: Apache-2.0
#pragma once

// Charging scenario data model: the EV fleet, the non-EV demand, the
// transformer parameters and the memoryless part of the cost, plus the
// charging-profile container and constraint diagnostics.

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "evsched/errors.hpp"
#include "evsched/thermal.hpp"

namespace evsched {

enum class CostKind { zero, quadratic };

/// Memoryless per-slot cost f applied to the per-unit total load. The zero
/// kind reduces the objective to pure transformer ageing; the quadratic kind
/// models Joule losses (or any price proportional to squared load).
struct MemorylessCost {
    CostKind kind = CostKind::zero;
    double coefficient = 0.0; ///< cost per (pu load)^2, quadratic kind only
    /// When true the ageing intercept beta is treated as absorbed into
    /// `coefficient` and the ageing term uses exp(alpha*x) alone. Never both.
    bool fold_beta = false;

    friend bool operator==(const MemorylessCost&, const MemorylessCost&) = default;

    [[nodiscard]] double operator()(double u_pu) const {
        return kind == CostKind::quadratic ? coefficient * u_pu * u_pu : 0.0;
    }

    [[nodiscard]] double derivative(double u_pu) const {
        return kind == CostKind::quadratic ? 2.0 * coefficient * u_pu : 0.0;
    }

    void validate() const {
        if (!(coefficient >= 0.0))
            throw ValidationError("MemorylessCost: coefficient must be >= 0");
        if (fold_beta && kind != CostKind::quadratic)
            throw ValidationError("MemorylessCost: fold_beta requires the quadratic kind");
    }
};

/// Full description of one charging problem instance.
struct Scenario {
    double delta_h = 0.5;                ///< slot duration, hours
    std::vector<double> demands_kwh;     ///< per-EV energy requirement S_i
    double v_max_kw = 3.0;               ///< per-EV charging power cap
    double nominal_kw = 90.0;            ///< transformer nominal active power
    std::vector<double> nonev_kw;        ///< non-EV demand per slot
    AmbientSeries ambient;               ///< ambient temperature per slot
    ThermalParams thermal;
    JouleParams joule;
    MemorylessCost memoryless;

    friend bool operator==(const Scenario&, const Scenario&) = default;

    [[nodiscard]] std::size_t slot_count() const { return nonev_kw.size(); }
    [[nodiscard]] std::size_t ev_count() const { return demands_kwh.size(); }

    [[nodiscard]] double per_unit(double kw) const { return kw / nominal_kw; }

    /// Largest energy a single EV can draw over the horizon, kWh.
    [[nodiscard]] double max_energy_per_ev_kwh() const {
        return v_max_kw * delta_h * static_cast<double>(slot_count());
    }

    /// Constant power that spreads S_i evenly over the horizon, kW.
    [[nodiscard]] double uniform_rate_kw(std::size_t ev) const {
        return demands_kwh[ev] / (delta_h * static_cast<double>(slot_count()));
    }

    void validate() const {
        if (slot_count() < 1) throw ValidationError("Scenario: at least one slot required");
        if (!(delta_h > 0.0)) throw ValidationError("Scenario: delta_h must be > 0");
        if (!(v_max_kw > 0.0)) throw ValidationError("Scenario: v_max_kw must be > 0");
        if (!(nominal_kw > 0.0)) throw ValidationError("Scenario: nominal_kw must be > 0");
        if (ambient.size() != slot_count())
            throw ValidationError("Scenario: ambient series length " +
                                  std::to_string(ambient.size()) + " != slot count " +
                                  std::to_string(slot_count()));
        for (double s : demands_kwh)
            if (!(s >= 0.0)) throw ValidationError("Scenario: demands must be >= 0");
        for (double l : nonev_kw)
            if (!(l >= 0.0)) throw ValidationError("Scenario: non-EV demand must be >= 0");
        thermal.validate();
        joule.validate();
        memoryless.validate();
    }
};

/// I x T matrix of charging powers in kW. Entries are kept non-negative by
/// the constructors and setters; tiny negative dust from solvers is clamped.
class ChargingProfile {
public:
    ChargingProfile() = default;

    ChargingProfile(std::size_t ev_count, std::size_t slot_count, double delta_h)
        : evs_(ev_count), slots_(slot_count), delta_h_(delta_h),
          data_(ev_count * slot_count, 0.0) {
        if (!(delta_h > 0.0)) throw ValidationError("ChargingProfile: delta_h must be > 0");
    }

    friend bool operator==(const ChargingProfile&, const ChargingProfile&) = default;

    [[nodiscard]] std::size_t ev_count() const { return evs_; }
    [[nodiscard]] std::size_t slot_count() const { return slots_; }
    [[nodiscard]] double delta_h() const { return delta_h_; }

    [[nodiscard]] double at(std::size_t ev, std::size_t slot) const {
        return data_[ev * slots_ + slot];
    }

    void set(std::size_t ev, std::size_t slot, double kw) {
        data_[ev * slots_ + slot] = guard(kw);
    }

    void set_row(std::size_t ev, std::span<const double> kw) {
        if (kw.size() != slots_)
            throw DimensionError("ChargingProfile: row length != slot count");
        for (std::size_t t = 0; t < slots_; ++t) data_[ev * slots_ + t] = guard(kw[t]);
    }

    [[nodiscard]] std::span<const double> row(std::size_t ev) const {
        return {data_.data() + ev * slots_, slots_};
    }

    /// Sum-EV load w_t in kW per slot.
    [[nodiscard]] std::vector<double> column_sums_kw() const {
        std::vector<double> w(slots_, 0.0);
        for (std::size_t i = 0; i < evs_; ++i)
            for (std::size_t t = 0; t < slots_; ++t) w[t] += at(i, t);
        return w;
    }

    [[nodiscard]] double delivered_kwh(std::size_t ev) const {
        double sum = 0.0;
        for (std::size_t t = 0; t < slots_; ++t) sum += at(ev, t);
        return sum * delta_h_;
    }

private:
    static double guard(double kw) {
        if (kw < 0.0) {
            if (kw < -1e-9)
                throw ValidationError("ChargingProfile: negative charging power " +
                                      std::to_string(kw));
            return 0.0;
        }
        return kw;
    }

    std::size_t evs_ = 0;
    std::size_t slots_ = 0;
    double delta_h_ = 0.5;
    std::vector<double> data_;
};

/// Spreads each EV's demand evenly over the horizon, clipped at v_max.
inline ChargingProfile uniform_profile(const Scenario& s) {
    ChargingProfile v(s.ev_count(), s.slot_count(), s.delta_h);
    for (std::size_t i = 0; i < s.ev_count(); ++i) {
        const double rate = std::min(s.uniform_rate_kw(i), s.v_max_kw);
        for (std::size_t t = 0; t < s.slot_count(); ++t) v.set(i, t, rate);
    }
    return v;
}

struct ConstraintTolerances {
    double energy_kwh = 1e-6;
    double bound_kw = 1e-9;
    double temp_c = 1e-6;
};

/// Constraint diagnostics for one profile against one scenario.
struct ConstraintReport {
    std::vector<double> energy_slack_kwh; ///< per EV: delivered - S_i
    double bound_violation_kw = 0.0;      ///< max excess outside [0, v_max]
    double temp_violation_c = 0.0;        ///< max over t of (x_t - x_max)
    bool feasible = false;

    [[nodiscard]] double min_energy_slack_kwh() const {
        double m = 0.0;
        bool first = true;
        for (double e : energy_slack_kwh) {
            m = first ? e : std::min(m, e);
            first = false;
        }
        return m;
    }

    [[nodiscard]] std::string describe() const {
        return "energy_slack_min=" + std::to_string(min_energy_slack_kwh()) +
               " kWh, bound_violation=" + std::to_string(bound_violation_kw) +
               " kW, temp_violation=" + std::to_string(temp_violation_c) + " degC";
    }
};

/// A scenario (or scenario/profile pair) admits no feasible solution.
class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& what, ConstraintReport report)
        : Error(what + " [" + report.describe() + "]"), report_(std::move(report)) {}

    [[nodiscard]] const ConstraintReport& report() const { return report_; }

private:
    ConstraintReport report_;
};

}  // namespace evsched
