// SPDX-License-Identifier: Apache-2.0
#pragma once

// Transformer hot-spot thermal model.
//
// Discrete-time hot-spot (HS) temperature recursion (linearized top-oil-rise
// model), with the total load u_t expressed in per-unit of the transformer
// nominal active power:
//
//   x_t = a*x_{t-1} + b1*u_t^2 + b2*u_{t-1}^2 + c_t,  c_t = gain*(offset + T_amb)
//
// Instantaneous factor of accelerated ageing: A_t = exp(alpha*x_t + beta),
// equal to 1 at the nominal hot-spot temperature. Joule losses per slot:
// J_t = k_pu * u_t^2 * base_kw * delta_h  [kWh].

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "evsched/errors.hpp"

namespace evsched {

inline constexpr double kNominalHotSpotC = 98.0;

/// Slope of the Arrhenius ageing exponent (15000/(x+273) form of the IEEE
/// loading guide) linearized at the nominal hot-spot, and the intercept that
/// makes faa(98 degC) == 1.
inline constexpr double kDefaultAgeingAlpha =
    15000.0 / ((kNominalHotSpotC + 273.0) * (kNominalHotSpotC + 273.0));
inline constexpr double kDefaultAgeingBeta = -kDefaultAgeingAlpha * kNominalHotSpotC;

/// Design lifetime reached when the ageing factor stays at 1.
inline constexpr double kDesignLifetimeYears = 40.0;

struct ThermalParams {
    double a = 0.83;    ///< load-memory decay, dimensionless, in [0, 1]
    double b1 = 30.91;  ///< degC per (pu load)^2, >= 0
    double b2 = -19.09; ///< degC per (pu load)^2, <= 0
    double amb_gain = 0.17;   ///< ambient coupling gain, dimensionless
    double amb_offset = 8.47; ///< ambient coupling offset, degC
    double x0 = 98.0;   ///< initial hot-spot temperature, degC
    double u0 = 1.0;    ///< initial per-unit load
    double x_max = 150.0; ///< shutdown hot-spot temperature, degC
    double alpha = kDefaultAgeingAlpha; ///< ageing slope, 1/degC, > 0
    double beta = kDefaultAgeingBeta;   ///< ageing intercept, <= 0

    friend bool operator==(const ThermalParams&, const ThermalParams&) = default;

    /// Exogenous drive c_t for an ambient temperature in degC.
    [[nodiscard]] double ambient_coupling(double ambient_c) const {
        return amb_gain * (amb_offset + ambient_c);
    }

    /// a*b1 + b2; the unrolled state (and hence the cost) is convex in the
    /// loads iff this is >= 0.
    [[nodiscard]] double convexity_margin() const { return a * b1 + b2; }

    void validate() const {
        if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("ThermalParams: a must be in [0, 1]");
        if (!(b1 >= 0.0)) throw ValidationError("ThermalParams: b1 must be >= 0");
        if (!(b2 <= 0.0)) throw ValidationError("ThermalParams: b2 must be <= 0");
        if (!(alpha > 0.0)) throw ValidationError("ThermalParams: alpha must be > 0");
        if (!(beta <= 0.0)) throw ValidationError("ThermalParams: beta must be <= 0");
        if (!(x0 >= 0.0)) throw ValidationError("ThermalParams: x0 must be >= 0");
        if (!(x_max > 0.0)) throw ValidationError("ThermalParams: x_max must be > 0");
        if (!(u0 >= 0.0)) throw ValidationError("ThermalParams: u0 must be >= 0");
    }
};

/// Per-unit total load over the horizon.
struct LoadSeries {
    std::vector<double> slots_pu; ///< u_t = total kW / nominal kW
    double delta_h = 0.5;         ///< slot duration, hours

    [[nodiscard]] std::size_t size() const { return slots_pu.size(); }
};

/// Ambient temperature over the horizon, degC.
struct AmbientSeries {
    std::vector<double> slots_c;

    friend bool operator==(const AmbientSeries&, const AmbientSeries&) = default;

    [[nodiscard]] std::size_t size() const { return slots_c.size(); }
};

/// Converts per-unit squared load into Joule losses in kWh per slot.
struct JouleParams {
    double k_pu = 0.01;    ///< equivalent-resistance constant, per-unit
    double base_kw = 90.0; ///< power base used to de-normalize, kW

    friend bool operator==(const JouleParams&, const JouleParams&) = default;

    [[nodiscard]] double losses_kwh(double u_pu, double delta_h) const {
        return k_pu * u_pu * u_pu * base_kw * delta_h;
    }

    void validate() const {
        if (!(k_pu >= 0.0)) throw ValidationError("JouleParams: k_pu must be >= 0");
        if (!(base_kw > 0.0)) throw ValidationError("JouleParams: base_kw must be > 0");
    }
};

/// Hot-spot temperature, ageing factor and Joule losses per slot.
struct StateTrace {
    std::vector<double> temps_c;
    std::vector<double> faa;
    std::vector<double> joule_kwh;

    [[nodiscard]] std::size_t size() const { return temps_c.size(); }

    [[nodiscard]] double peak_temp_c() const {
        double peak = 0.0;
        for (double x : temps_c) peak = std::max(peak, x);
        return peak;
    }

    [[nodiscard]] double total_joule_kwh() const {
        double sum = 0.0;
        for (double j : joule_kwh) sum += j;
        return sum;
    }
};

/// One step of the hot-spot recursion.
inline double step_temperature(double x_prev_c, double u_pu, double u_prev_pu, double c_t,
                               const ThermalParams& p) {
    return p.a * x_prev_c + p.b1 * u_pu * u_pu + p.b2 * u_prev_pu * u_prev_pu + c_t;
}

/// Instantaneous factor of accelerated ageing at hot-spot temperature x.
/// Strictly increasing in x; equals 1 at x = -beta/alpha.
inline double faa(double x_c, const ThermalParams& p) {
    return std::exp(p.alpha * x_c + p.beta);
}

/// Iterates the recursion from (x0, u0) over the whole horizon and fills in
/// the ageing and Joule columns.
inline StateTrace simulate_trace(const LoadSeries& loads, const AmbientSeries& ambient,
                                 const ThermalParams& p, const JouleParams& joule = {}) {
    if (loads.size() != ambient.size())
        throw DimensionError("simulate_trace: load series has " + std::to_string(loads.size()) +
                             " slots but ambient series has " + std::to_string(ambient.size()));
    const std::size_t n = loads.size();
    StateTrace trace;
    trace.temps_c.resize(n);
    trace.faa.resize(n);
    trace.joule_kwh.resize(n);
    double x = p.x0;
    double u_prev = p.u0;
    for (std::size_t t = 0; t < n; ++t) {
        const double u = loads.slots_pu[t];
        x = step_temperature(x, u, u_prev, p.ambient_coupling(ambient.slots_c[t]), p);
        trace.temps_c[t] = x;
        trace.faa[t] = faa(x, p);
        trace.joule_kwh[t] = joule.losses_kwh(u, loads.delta_h);
        u_prev = u;
    }
    return trace;
}

/// Closed-form unrolled state at 1-based slot t:
///
///   g_t = a^t x0 + b1 u_t^2 + b2 a^(t-1) u0^2
///       + (a b1 + b2) sum_{k=1}^{t-1} a^(k-1) u_{t-k}^2
///       + sum_{k=1}^{t} a^(t-k) c_k
inline double unroll_state(std::size_t t, const LoadSeries& loads, const AmbientSeries& ambient,
                           const ThermalParams& p) {
    if (loads.size() != ambient.size())
        throw DimensionError("unroll_state: load and ambient series lengths differ");
    if (t < 1 || t > loads.size())
        throw DomainError("unroll_state: slot index " + std::to_string(t) +
                          " outside 1.." + std::to_string(loads.size()));
    const auto& u = loads.slots_pu;
    const double m = p.convexity_margin();

    double a_pow = 1.0; // a^k
    double memory = 0.0;
    for (std::size_t k = 1; k + 1 <= t; ++k) {
        const double u_tk = u[t - k - 1]; // u_{t-k}, shifted to 0-based storage
        memory += a_pow * u_tk * u_tk;
        a_pow *= p.a;
    }
    // after the loop a_pow == a^(t-1)
    const double u_t = u[t - 1];
    double g = a_pow * p.a * p.x0 + p.b1 * u_t * u_t + p.b2 * a_pow * p.u0 * p.u0 + m * memory;

    double drive = 0.0;
    for (std::size_t k = 1; k <= t; ++k)
        drive = p.a * drive + p.ambient_coupling(ambient.slots_c[k - 1]);
    return g + drive;
}

/// Transformer lifetime in years implied by an ageing-factor series:
/// design lifetime divided by the average ageing factor.
inline double lifetime_years(std::span<const double> faa_series) {
    if (faa_series.empty()) throw DomainError("lifetime_years: empty ageing series");
    double sum = 0.0;
    for (double a : faa_series) {
        if (!(a > 0.0)) throw DomainError("lifetime_years: ageing factors must be > 0");
        sum += a;
    }
    return kDesignLifetimeYears * static_cast<double>(faa_series.size()) / sum;
}

}  // namespace evsched
