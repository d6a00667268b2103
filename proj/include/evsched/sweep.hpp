// SPDX-License-Identifier: Apache-2.0
#pragma once

// Policy comparison sweeps: one run per (policy, EV count, FSNR, noise seed)
// cell, each policy planning on the noisy forecast and being measured on the
// true demand. Results go to a comparison CSV.
//
// Run-spec files use the same `key = value` syntax as scenario files:
//
//   scenario = evening_peak.cfg        # or synth_* keys instead
//   policies = central,ddc,ivfa,rect,pac,uniform
//   ev_counts = 0,5,10,15
//   demand_kwh = 24
//   fsnr_db = inf,10,0
//   noise_seeds = 1,2,3
//   out = comparison.csv

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "evsched/csv.hpp"
#include "evsched/metrics.hpp"
#include "evsched/noise.hpp"
#include "evsched/policies.hpp"
#include "evsched/scenario_io.hpp"
#include "evsched/synth.hpp"

namespace evsched {

struct RunSpec {
    // exactly one scenario source
    std::string scenario_path;          ///< file source (empty when synthetic)
    bool synthetic = false;
    DemandShape synth_shape = DemandShape::evening_peak;
    std::size_t synth_households = 30;
    std::uint64_t synth_seed = 1;
    std::size_t synth_slots = 30;
    double synth_delta_h = 0.5;

    std::vector<Policy> policies;
    std::vector<std::size_t> ev_counts; ///< empty: keep the scenario's fleet
    double demand_kwh = 24.0;           ///< per-EV demand when resizing the fleet
    std::vector<double> fsnr_db{kPerfectForecast};
    std::vector<std::uint64_t> noise_seeds{1};
    double rect_power_kw = 0.0;
    int max_rounds = 50;
    std::uint64_t pac_seed = 1;
    std::string out_path = "comparison.csv";

    void validate() const {
        if (scenario_path.empty() == !synthetic)
            throw ValidationError("RunSpec: exactly one scenario source required");
        if (policies.empty()) throw ValidationError("RunSpec: no policies listed");
        if (fsnr_db.empty()) throw ValidationError("RunSpec: no fsnr values listed");
        if (noise_seeds.empty()) throw ValidationError("RunSpec: no noise seeds listed");
    }
};

struct ComparisonRow {
    Policy policy{};
    std::size_t ev_count = 0;
    double fsnr_db = kPerfectForecast;
    std::uint64_t noise_seed = 0;
    PolicyMetrics metrics;
    int rounds = 0;
    bool converged = true;
};

inline double parse_fsnr(std::string_view text, long line) {
    if (text == "inf") return kPerfectForecast;
    return detail::parse_double_field(text, line);
}

inline RunSpec load_runspec(const std::string& path) {
    RunSpec spec;
    spec.fsnr_db.clear();
    spec.noise_seeds.clear();
    const std::vector<std::string> lines = detail::read_lines(path);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const long line_no = static_cast<long>(n + 1);
        std::string_view line = lines[n];
        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
        const std::string key{detail::trim(line.substr(0, eq))};
        const std::string_view value = detail::trim(line.substr(eq + 1));

        if (key == "scenario") {
            spec.scenario_path =
                (std::filesystem::path(path).parent_path() / std::string(value)).string();
        } else if (key == "synth_shape") {
            spec.synthetic = true;
            if (value == "evening_peak")
                spec.synth_shape = DemandShape::evening_peak;
            else if (value == "flat")
                spec.synth_shape = DemandShape::flat;
            else
                throw ParseError("synth_shape must be evening_peak or flat", line_no);
        } else if (key == "synth_households") {
            spec.synthetic = true;
            spec.synth_households =
                static_cast<std::size_t>(detail::parse_index_field(value, line_no));
        } else if (key == "synth_seed") {
            spec.synthetic = true;
            spec.synth_seed = static_cast<std::uint64_t>(detail::parse_index_field(value, line_no));
        } else if (key == "synth_slots") {
            spec.synthetic = true;
            spec.synth_slots = static_cast<std::size_t>(detail::parse_index_field(value, line_no));
        } else if (key == "policies") {
            for (std::string_view field : detail::split_fields(value))
                spec.policies.push_back(parse_policy(std::string(detail::trim(field))));
        } else if (key == "ev_counts") {
            for (std::string_view field : detail::split_fields(value)) {
                const std::string_view f = detail::trim(field);
                double count = detail::parse_double_field(f, line_no);
                if (count < 0 || count != static_cast<double>(static_cast<std::size_t>(count)))
                    throw ParseError("ev_counts must be non-negative integers", line_no);
                spec.ev_counts.push_back(static_cast<std::size_t>(count));
            }
        } else if (key == "demand_kwh") {
            spec.demand_kwh = detail::parse_double_field(value, line_no);
        } else if (key == "fsnr_db") {
            for (std::string_view field : detail::split_fields(value))
                spec.fsnr_db.push_back(parse_fsnr(detail::trim(field), line_no));
        } else if (key == "noise_seeds") {
            for (std::string_view field : detail::split_fields(value))
                spec.noise_seeds.push_back(
                    static_cast<std::uint64_t>(detail::parse_index_field(detail::trim(field), line_no)));
        } else if (key == "rect_power_kw") {
            spec.rect_power_kw = detail::parse_double_field(value, line_no);
        } else if (key == "max_rounds") {
            spec.max_rounds = static_cast<int>(detail::parse_index_field(value, line_no));
        } else if (key == "pac_seed") {
            spec.pac_seed = static_cast<std::uint64_t>(detail::parse_index_field(value, line_no));
        } else if (key == "out") {
            spec.out_path = std::string(value);
        } else {
            throw ParseError("unknown key '" + key + "'", line_no);
        }
    }
    if (spec.fsnr_db.empty()) spec.fsnr_db.push_back(kPerfectForecast);
    if (spec.noise_seeds.empty()) spec.noise_seeds.push_back(1);
    spec.validate();
    return spec;
}

inline Scenario base_scenario(const RunSpec& spec) {
    if (!spec.synthetic) return load_scenario(spec.scenario_path);
    const SynthSeries series = synth_demand(spec.synth_shape, spec.synth_households,
                                            spec.synth_seed, spec.synth_slots, spec.synth_delta_h);
    Scenario s;
    s.delta_h = spec.synth_delta_h;
    s.nonev_kw = series.nonev_kw;
    s.ambient = series.ambient;
    s.joule.base_kw = s.nominal_kw;
    s.validate();
    return s;
}

/// Runs every (policy, EV count, fsnr, seed) cell. Planning uses the noisy
/// forecast; metrics use the true demand. Failures name the cell.
inline std::vector<ComparisonRow> compare_policies(const RunSpec& spec) {
    spec.validate();
    const Scenario base = base_scenario(spec);
    std::vector<std::size_t> ev_counts = spec.ev_counts;
    if (ev_counts.empty()) ev_counts.push_back(base.ev_count());

    std::vector<ComparisonRow> rows;
    for (std::size_t ev_count : ev_counts) {
        Scenario truth = base;
        if (!spec.ev_counts.empty())
            truth.demands_kwh.assign(ev_count, spec.demand_kwh);
        for (double fsnr : spec.fsnr_db) {
            const bool noisy = !std::isinf(fsnr);
            const std::vector<std::uint64_t> seeds =
                noisy ? spec.noise_seeds : std::vector<std::uint64_t>{0};
            for (std::uint64_t seed : seeds) {
                Scenario planning = truth;
                if (noisy)
                    planning.nonev_kw =
                        apply_forecast_noise(truth.nonev_kw, ForecastNoise{fsnr, seed, 48});
                for (Policy policy : spec.policies) {
                    PolicyOptions opts;
                    opts.brd.max_rounds = spec.max_rounds;
                    opts.brd.rect_power_kw = spec.rect_power_kw;
                    opts.pac.seed = spec.pac_seed;
                    // a noisy forecast can exceed the hot-spot ceiling on its
                    // own; plan without it rather than reject the cell
                    opts.solve.temp_constraint = !noisy;
                    opts.brd.ddc_options.temp_constraint = !noisy;
                    try {
                        const PolicyRun run = run_policy(planning, policy, opts);
                        ComparisonRow row;
                        row.policy = policy;
                        row.ev_count = ev_count;
                        row.fsnr_db = fsnr;
                        row.noise_seed = noisy ? seed : 0;
                        row.metrics = evaluate(run.profile, truth);
                        row.rounds = run.rounds;
                        row.converged = run.converged;
                        rows.push_back(row);
                    } catch (const Error& e) {
                        throw Error("sweep cell policy=" + std::string(to_string(policy)) +
                                    " ev_count=" + std::to_string(ev_count) + " fsnr=" +
                                    (noisy ? format_double(fsnr) : std::string("inf")) +
                                    " seed=" + std::to_string(seed) + ": " + e.what());
                    }
                }
            }
        }
    }
    return rows;
}

inline void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
    out << "policy,ev_count,fsnr_db,noise_seed,lifetime_years,peak_temp_c,total_joule_kwh,"
           "total_cost,shutdown_violated,energy_shortfall_kwh,rounds,converged\n";
    for (const ComparisonRow& r : rows) {
        out << to_string(r.policy) << ',' << r.ev_count << ','
            << (std::isinf(r.fsnr_db) ? std::string("inf") : format_double(r.fsnr_db)) << ','
            << r.noise_seed << ',' << format_fixed(r.metrics.lifetime_years, 2) << ','
            << format_fixed(r.metrics.peak_temp_c, 2) << ','
            << format_fixed(r.metrics.total_joule_kwh, 3) << ','
            << format_double(r.metrics.total_cost) << ','
            << (r.metrics.shutdown_violated ? 1 : 0) << ','
            << format_fixed(r.metrics.energy_shortfall_kwh, 3) << ',' << r.rounds << ','
            << (r.converged ? 1 : 0) << '\n';
    }
}

inline void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    write_comparison_csv(out, rows);
}

}  // namespace evsched
