// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "evsched/csv.hpp"
#include "evsched/metrics.hpp"
#include "evsched/noise.hpp"
#include "evsched/scenario_io.hpp"
#include "evsched/sweep.hpp"
#include "evsched/synth.hpp"

using namespace evsched;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("evsched_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

Scenario small_scenario() {
    Scenario s;
    s.delta_h = 0.5;
    s.demands_kwh = {7.25};
    s.nonev_kw = {61.5, 48.25};
    s.ambient.slots_c = {14.5, 13.0};
    s.joule.base_kw = s.nominal_kw;
    return s;
}

}  // namespace

TEST_CASE("the shipped district scenario loads with the documented values") {
    const Scenario s = load_scenario(EVSCHED_DATA_DIR "/evening_peak.cfg");
    CHECK(s.slot_count() == 30);
    CHECK(s.ev_count() == 15);
    for (double demand : s.demands_kwh) CHECK(demand == 24.0);
    CHECK(s.thermal.x0 == 98.0);
    CHECK(s.thermal.x_max == 150.0);
    CHECK(s.delta_h == 0.5);
    CHECK(s.nominal_kw == 90.0);
    CHECK(check_feasibility(s).feasible);
}

TEST_CASE("scenario save/load round-trips exactly") {
    TempDir dir;
    Scenario s = small_scenario();
    s.thermal.x0 = 97.123456789012345;
    s.memoryless = {CostKind::quadratic, 0.125, true};
    save_scenario(dir.file("mini.cfg"), s);
    const Scenario back = load_scenario(dir.file("mini.cfg"));
    CHECK(back == s);
}

TEST_CASE("load_scenario rejects length mismatches with the declared horizon") {
    TempDir dir;
    save_scenario(dir.file("mini.cfg"), small_scenario());
    // truncate the demand series to one slot
    std::ofstream(dir.file("mini.nonev.csv"), std::ios::binary) << "slot,value\n1,61.5\n";
    CHECK_THROWS_AS(load_scenario(dir.file("mini.cfg")), ValidationError);
}

TEST_CASE("load_scenario reports parse errors with line numbers") {
    TempDir dir;
    std::ofstream(dir.file("broken.cfg"), std::ios::binary)
        << "slots = 2\n"
        << "delta_h zzz\n";
    try {
        load_scenario(dir.file("broken.cfg"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }

    std::ofstream(dir.file("unknown.cfg"), std::ios::binary)
        << "slots = 2\n"
        << "frobnicate = 1\n";
    CHECK_THROWS_AS(load_scenario(dir.file("unknown.cfg")), ParseError);
}

TEST_CASE("load_scenario rejects negative loads") {
    TempDir dir;
    save_scenario(dir.file("mini.cfg"), small_scenario());
    std::ofstream(dir.file("mini.nonev.csv"), std::ios::binary)
        << "slot,value\n1,61.5\n2,-4.0\n";
    CHECK_THROWS_AS(load_scenario(dir.file("mini.cfg")), ValidationError);
}

TEST_CASE("series CSV rejects malformed input") {
    TempDir dir;
    std::ofstream(dir.file("bad.csv"), std::ios::binary) << "slot,value\n2,1.0\n";
    CHECK_THROWS_AS(read_series_csv(dir.file("bad.csv")), ParseError); // slots must start at 1
    std::ofstream(dir.file("header.csv"), std::ios::binary) << "time,value\n1,1.0\n";
    CHECK_THROWS_AS(read_series_csv(dir.file("header.csv")), ParseError);
    std::ofstream(dir.file("junk.csv"), std::ios::binary) << "slot,value\n1,1.0x\n";
    CHECK_THROWS_AS(read_series_csv(dir.file("junk.csv")), ParseError);
}

TEST_CASE("profile CSV round-trips bit-exactly") {
    TempDir dir;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ChargingProfile v(3, 7, 0.5);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t t = 0; t < 7; ++t) v.set(i, t, 3.0 * unit(rng));
    write_profile_csv(dir.file("profile.csv"), v);
    const ChargingProfile back = read_profile_csv(dir.file("profile.csv"), 0.5);
    CHECK(back == v);

    // emitting the parsed profile reproduces the bytes
    std::ostringstream first, second;
    write_profile_csv(first, v);
    write_profile_csv(second, back);
    CHECK(first.str() == second.str());
}

TEST_CASE("profile CSV rejects holes and duplicates") {
    TempDir dir;
    std::ofstream(dir.file("holes.csv"), std::ios::binary)
        << "ev,slot,kw\n1,1,1.0\n1,2,1.0\n2,1,1.0\n";
    CHECK_THROWS_AS(read_profile_csv(dir.file("holes.csv"), 0.5), ParseError);
    std::ofstream(dir.file("dup.csv"), std::ios::binary)
        << "ev,slot,kw\n1,1,1.0\n1,1,2.0\n";
    CHECK_THROWS_AS(read_profile_csv(dir.file("dup.csv"), 0.5), ParseError);
}

TEST_CASE("trace CSV emission is idempotent after one parse cycle") {
    const Scenario s = small_scenario();
    const ChargingProfile v = uniform_profile(s);
    const LoadSeries loads = total_load(v, s);
    const StateTrace trace = simulate_trace(loads, s.ambient, s.thermal, s.joule);
    std::ostringstream out;
    write_trace_csv(out, loads, trace);
    const std::string text = out.str();
    CHECK(text.substr(0, text.find('\n')) == "slot,load_pu,temp_c,faa,joule_kwh");
    CHECK(std::count(text.begin(), text.end(), '\n') == 3); // header + 2 slots
}

TEST_CASE("synth_demand flat shape is constant") {
    const SynthSeries series = synth_demand(DemandShape::flat, 30, 7, 12);
    for (double l : series.nonev_kw) CHECK(l == series.nonev_kw.front());
    for (double a : series.ambient.slots_c) CHECK(a == series.ambient.slots_c.front());
}

TEST_CASE("synth_demand evening peak lands between 19:00 and 21:00") {
    for (std::uint64_t seed : {1u, 2u, 3u, 17u, 99u}) {
        const SynthSeries series = synth_demand(DemandShape::evening_peak, 30, seed);
        std::size_t argmax = 0;
        for (std::size_t t = 1; t < series.nonev_kw.size(); ++t)
            if (series.nonev_kw[t] > series.nonev_kw[argmax]) argmax = t;
        const double hour = 17.0 + (static_cast<double>(argmax) + 0.5) * 0.5;
        CHECK(hour >= 19.0);
        CHECK(hour <= 21.0);
    }
}

TEST_CASE("synth_demand thirty households peak near nominal") {
    for (std::uint64_t seed : {4u, 11u}) {
        const SynthSeries series = synth_demand(DemandShape::evening_peak, 30, seed);
        double peak = 0.0;
        for (double l : series.nonev_kw) peak = std::max(peak, l);
        CHECK(peak / 90.0 >= 0.8);
        CHECK(peak / 90.0 <= 1.0);
    }
}

TEST_CASE("synth_demand is deterministic per seed") {
    const SynthSeries a = synth_demand(DemandShape::evening_peak, 30, 5);
    const SynthSeries b = synth_demand(DemandShape::evening_peak, 30, 5);
    CHECK(a.nonev_kw == b.nonev_kw);
    CHECK(a.ambient == b.ambient);
}

TEST_CASE("apply_forecast_noise leaves a perfect forecast untouched") {
    const std::vector<double> series{10.0, 20.0, 0.0};
    CHECK(apply_forecast_noise(series, ForecastNoise{}) == series);
}

TEST_CASE("apply_forecast_noise keeps a zero series at zero") {
    const std::vector<double> zeros(8, 0.0);
    CHECK(apply_forecast_noise(zeros, ForecastNoise{10.0, 3, 48}) == zeros);
}

TEST_CASE("apply_forecast_noise standard deviation matches the FSNR formula") {
    // Monte-Carlo estimate over 1e5 samples at 10 dB
    const std::vector<double> series(1, 50.0);
    const double sigma = noise_sigma_kw(series, 10.0);
    CHECK(sigma == doctest::Approx(50.0 * std::pow(10.0, -0.5)).epsilon(1e-12));

    double sum = 0.0, sum_sq = 0.0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
        // unclamped noise: keep the mean high enough that max(.,0) never clips
        const std::vector<double> big(1, 1000.0);
        const double sample =
            apply_forecast_noise(big, ForecastNoise{10.0, static_cast<std::uint64_t>(k), 48})[0] -
            1000.0;
        sum += sample;
        sum_sq += sample * sample;
    }
    const double sigma_big = noise_sigma_kw(std::vector<double>(1, 1000.0), 10.0);
    const double empirical = std::sqrt(sum_sq / n - (sum / n) * (sum / n));
    CHECK(std::abs(empirical - sigma_big) / sigma_big <= 0.02);
}

TEST_CASE("apply_forecast_noise is reproducible and clamps at zero") {
    const std::vector<double> series{5.0, 1.0, 0.2, 9.0};
    const ForecastNoise noise{0.0, 42, 48};
    const auto a = apply_forecast_noise(series, noise);
    const auto b = apply_forecast_noise(series, noise);
    CHECK(a == b);
    for (double l : a) CHECK(l >= 0.0);
}

TEST_CASE("evaluate reports the nominal lifetime at the fixed point") {
    Scenario s = small_scenario();
    s.demands_kwh.clear();
    s.nonev_kw.assign(30, 90.0);
    s.ambient.slots_c.assign(30, 20.0);
    const PolicyMetrics m = evaluate(ChargingProfile(0, 30, s.delta_h), s);
    CHECK(std::abs(m.lifetime_years - 40.0) <= 0.5);
    CHECK_FALSE(m.shutdown_violated);
    CHECK(m.energy_shortfall_kwh == 0.0);
}

TEST_CASE("evaluate flags a shutdown crossing however small") {
    Scenario s = small_scenario();
    s.demands_kwh.clear();
    s.nonev_kw.assign(5, 90.0);
    s.ambient.slots_c.assign(5, 20.0);
    // place the ceiling a hair below the plateau the trace reaches
    s.thermal.x_max = 97.9998;
    const PolicyMetrics m = evaluate(ChargingProfile(0, 5, s.delta_h), s);
    CHECK(m.shutdown_violated);
}

TEST_CASE("evaluate halves the lifetime when every ageing factor doubles") {
    Scenario s = small_scenario();
    s.demands_kwh.clear();
    s.nonev_kw.assign(10, 90.0);
    s.ambient.slots_c.assign(10, 20.0);
    const PolicyMetrics base = evaluate(ChargingProfile(0, 10, s.delta_h), s);
    Scenario hot = s;
    hot.thermal.beta = s.thermal.beta + std::log(2.0); // scales every A_t by 2
    const PolicyMetrics doubled = evaluate(ChargingProfile(0, 10, s.delta_h), hot);
    CHECK(doubled.lifetime_years == doctest::Approx(0.5 * base.lifetime_years).epsilon(1e-12));
}

TEST_CASE("planning on a noisy forecast never changes the evaluation scenario") {
    Scenario s = small_scenario();
    const ChargingProfile v = uniform_profile(s);
    const PolicyMetrics clean = evaluate(v, s);
    Scenario noisy = s;
    noisy.nonev_kw = apply_forecast_noise(s.nonev_kw, ForecastNoise{0.0, 5, 48});
    REQUIRE(noisy.nonev_kw != s.nonev_kw);
    // same fixed profile, same true scenario: identical metrics
    const PolicyMetrics again = evaluate(v, s);
    CHECK(clean.lifetime_years == again.lifetime_years);
    CHECK(clean.total_cost == again.total_cost);
}

TEST_CASE("runspec parsing, sweep execution and the comparison CSV") {
    TempDir dir;
    Scenario s = small_scenario();
    s.demands_kwh = {1.0, 1.0};
    s.nonev_kw.assign(6, 40.0);
    s.ambient.slots_c.assign(6, 15.0);
    save_scenario(dir.file("mini.cfg"), s);
    std::ofstream(dir.file("spec.cfg"), std::ios::binary)
        << "scenario = mini.cfg\n"
        << "policies = uniform,pac,ivfa\n"
        << "ev_counts = 0,2\n"
        << "demand_kwh = 1.0\n"
        << "fsnr_db = inf,10\n"
        << "noise_seeds = 1,2\n"
        << "out = cmp.csv\n";
    const RunSpec spec = load_runspec(dir.file("spec.cfg"));
    CHECK(spec.policies.size() == 3);
    CHECK(spec.fsnr_db.size() == 2);

    const auto rows = compare_policies(spec);
    // 2 ev counts x (1 noiseless + 2 noisy seeds) x 3 policies
    CHECK(rows.size() == 2 * 3 * 3);

    // all policies coincide with no EVs
    for (const ComparisonRow& row : rows)
        if (row.ev_count == 0 && std::isinf(row.fsnr_db))
            CHECK(row.metrics.total_cost ==
                  doctest::Approx(rows.front().metrics.total_cost).epsilon(1e-12));

    write_comparison_csv(dir.file("cmp.csv"), rows);
    std::ifstream in(dir.file("cmp.csv"), std::ios::binary);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "policy,ev_count,fsnr_db,noise_seed,lifetime_years,peak_temp_c,total_joule_kwh,"
          "total_cost,shutdown_violated,energy_shortfall_kwh,rounds,converged");
}

TEST_CASE("runspec validation rejects zero or two scenario sources") {
    TempDir dir;
    std::ofstream(dir.file("none.cfg"), std::ios::binary) << "policies = uniform\n";
    CHECK_THROWS_AS(load_runspec(dir.file("none.cfg")), ValidationError);
    std::ofstream(dir.file("both.cfg"), std::ios::binary)
        << "scenario = x.cfg\nsynth_households = 30\npolicies = uniform\n";
    CHECK_THROWS_AS(load_runspec(dir.file("both.cfg")), ValidationError);
}

TEST_CASE("format_double survives a parse round trip") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unit(-1e6, 1e6);
    for (int rep = 0; rep < 1000; ++rep) {
        const double x = unit(rng);
        const std::string text = format_double(x);
        CHECK(detail::parse_double_field(text, 1) == x);
    }
}
