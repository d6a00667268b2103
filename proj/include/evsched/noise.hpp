// SPDX-License-Identifier: Apache-2.0
#pragma once

// Forecast-noise model: additive white Gaussian noise on the non-EV demand,
// parameterized by the forecasting signal-to-noise ratio in dB:
//
//   sigma^2 = mean(l_t^2) * 10^(-fsnr/10)
//
// The noisy series is clamped at zero. An infinite FSNR leaves the series
// untouched.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "evsched/errors.hpp"

namespace evsched {

inline constexpr double kPerfectForecast = std::numeric_limits<double>::infinity();

struct ForecastNoise {
    double fsnr_db = kPerfectForecast;
    std::uint64_t seed = 0;
    std::size_t day_slots = 48; ///< recorded averaging window of the definition

    [[nodiscard]] bool perfect() const { return std::isinf(fsnr_db) && fsnr_db > 0.0; }
};

/// Noise standard deviation implied by a series and an FSNR in dB. The signal
/// power is averaged over the series the noise is applied to.
inline double noise_sigma_kw(const std::vector<double>& series_kw, double fsnr_db) {
    if (series_kw.empty()) throw DomainError("noise_sigma_kw: empty series");
    double power = 0.0;
    for (double l : series_kw) power += l * l;
    power /= static_cast<double>(series_kw.size());
    return std::sqrt(power * std::pow(10.0, -fsnr_db / 10.0));
}

inline std::vector<double> apply_forecast_noise(const std::vector<double>& series_kw,
                                                const ForecastNoise& noise) {
    if (noise.perfect()) return series_kw;
    if (std::isnan(noise.fsnr_db)) throw DomainError("apply_forecast_noise: fsnr is NaN");
    const double sigma = noise_sigma_kw(series_kw, noise.fsnr_db);
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> out(series_kw.size());
    for (std::size_t t = 0; t < series_kw.size(); ++t)
        out[t] = std::max(series_kw[t] + sigma * gauss(rng), 0.0);
    return out;
}

}  // namespace evsched
