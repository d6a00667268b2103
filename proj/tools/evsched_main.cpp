// SPDX-License-Identifier: Apache-2.0

// evsched CLI.
//
//   solve     one scenario + one policy -> profile CSV + metrics
//   simulate  profile CSV + scenario    -> trace CSV + metrics
//   sweep     run-spec file             -> comparison CSV
//   check     scenario                  -> feasibility / convexity report
//
// Exit codes: 0 success, 2 infeasible, 3 parse/validation error,
// 4 solver non-convergence.

#include <cmath>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "evsched/evsched.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitParse = 3;
constexpr int kExitNoConvergence = 4;

double parse_fsnr_flag(const std::string& text) {
    if (text == "inf") return evsched::kPerfectForecast;
    try {
        return std::stod(text);
    } catch (const std::exception&) {
        throw evsched::ValidationError("--fsnr expects a dB value or 'inf', got '" + text + "'");
    }
}

void print_metrics(const evsched::PolicyMetrics& m) {
    std::cout << "lifetime_years=" << evsched::format_fixed(m.lifetime_years, 2) << '\n'
              << "peak_temp_c=" << evsched::format_fixed(m.peak_temp_c, 2) << '\n'
              << "total_joule_kwh=" << evsched::format_fixed(m.total_joule_kwh, 3) << '\n'
              << "total_cost=" << evsched::format_double(m.total_cost) << '\n'
              << "shutdown_violated=" << (m.shutdown_violated ? 1 : 0) << '\n'
              << "energy_shortfall_kwh=" << evsched::format_fixed(m.energy_shortfall_kwh, 3)
              << '\n';
}

struct SolveArgs {
    std::string scenario;
    std::string policy = "central";
    std::string out = "profile.csv";
    std::string fsnr = "inf";
    std::uint64_t seed = 1;
    double rect_power = 0.0;
    int max_rounds = 50;
};

int run_solve(const SolveArgs& args) {
    const evsched::Scenario truth = evsched::load_scenario(args.scenario);
    evsched::Scenario planning = truth;
    const double fsnr = parse_fsnr_flag(args.fsnr);
    if (!std::isinf(fsnr))
        planning.nonev_kw = evsched::apply_forecast_noise(
            truth.nonev_kw, evsched::ForecastNoise{fsnr, args.seed, 48});

    evsched::PolicyOptions opts;
    opts.brd.max_rounds = args.max_rounds;
    opts.brd.rect_power_kw = args.rect_power;
    opts.brd.seed = args.seed;
    opts.pac.seed = args.seed;
    // planning on a noisy forecast drops the hot-spot ceiling; the forecast
    // error alone can exceed it
    opts.solve.temp_constraint = std::isinf(fsnr);
    opts.brd.ddc_options.temp_constraint = std::isinf(fsnr);

    const evsched::Policy policy = evsched::parse_policy(args.policy);
    const evsched::PolicyRun run = evsched::run_policy(planning, policy, opts);
    evsched::write_profile_csv(args.out, run.profile);

    std::cout << "policy=" << evsched::to_string(policy) << '\n';
    if (run.rounds > 0) std::cout << "rounds=" << run.rounds << '\n';
    print_metrics(evsched::evaluate(run.profile, truth));
    std::cerr << "profile written to " << args.out << '\n';
    if (!run.converged) {
        std::cerr << "warning: did not converge within the round limit\n";
        return kExitNoConvergence;
    }
    return kExitOk;
}

struct SimulateArgs {
    std::string scenario;
    std::string profile;
    std::string out = "trace.csv";
};

int run_simulate(const SimulateArgs& args) {
    const evsched::Scenario s = evsched::load_scenario(args.scenario);
    const evsched::ChargingProfile v = evsched::read_profile_csv(args.profile, s.delta_h);
    const evsched::LoadSeries loads = evsched::total_load(v, s);
    const evsched::StateTrace trace =
        evsched::simulate_trace(loads, s.ambient, s.thermal, s.joule);
    evsched::write_trace_csv(args.out, loads, trace);
    print_metrics(evsched::evaluate(v, s));
    std::cerr << "trace written to " << args.out << '\n';
    return kExitOk;
}

struct SweepArgs {
    std::string spec;
    std::string out; // overrides the spec's out path when set
};

int run_sweep(const SweepArgs& args) {
    evsched::RunSpec spec = evsched::load_runspec(args.spec);
    if (!args.out.empty()) spec.out_path = args.out;
    const auto rows = evsched::compare_policies(spec);
    evsched::write_comparison_csv(spec.out_path, rows);
    std::cerr << rows.size() << " rows written to " << spec.out_path << '\n';
    return kExitOk;
}

int run_check(const std::string& scenario_path) {
    const evsched::Scenario s = evsched::load_scenario(scenario_path);
    const evsched::ConvexityCheck cx = evsched::check_convexity(s);
    const evsched::FeasibilityCheck feas = evsched::check_feasibility(s);
    std::cout << "slots=" << s.slot_count() << '\n'
              << "evs=" << s.ev_count() << '\n'
              << "convex=" << (cx.convex ? 1 : 0) << '\n'
              << "convexity_margin=" << evsched::format_double(cx.margin) << '\n'
              << "energy_condition=" << (feas.energy_ok ? 1 : 0) << '\n'
              << "uniform_temp_violation_c="
              << evsched::format_double(feas.uniform_report.temp_violation_c) << '\n'
              << "feasible=" << (feas.feasible ? 1 : 0) << '\n';
    return feas.feasible && cx.convex ? kExitOk : kExitInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EV charging scheduling against transformer ageing and Joule losses"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    CLI::App* solve = app.add_subcommand("solve", "compute a charging profile for one policy");
    solve->add_option("--scenario", solve_args.scenario, "scenario config file")->required();
    solve->add_option("--policy", solve_args.policy,
                      "central|two_step|ddc|ivfa|rect|pac|uniform");
    solve->add_option("--out", solve_args.out, "output profile CSV path");
    solve->add_option("--fsnr", solve_args.fsnr, "forecast SNR in dB, or 'inf'");
    solve->add_option("--seed", solve_args.seed, "noise / policy RNG seed");
    solve->add_option("--rect-power", solve_args.rect_power,
                      "rectangular charging power in kW (0 = v_max)");
    solve->add_option("--max-rounds", solve_args.max_rounds, "best-response round cap");

    SimulateArgs sim_args;
    CLI::App* simulate = app.add_subcommand("simulate", "simulate a stored profile");
    simulate->add_option("--scenario", sim_args.scenario, "scenario config file")->required();
    simulate->add_option("--profile", sim_args.profile, "profile CSV to simulate")->required();
    simulate->add_option("--out", sim_args.out, "output trace CSV path");

    SweepArgs sweep_args;
    CLI::App* sweep = app.add_subcommand("sweep", "run a policy comparison sweep");
    sweep->add_option("--spec", sweep_args.spec, "run-spec file")->required();
    sweep->add_option("--out", sweep_args.out, "override the spec's output CSV path");

    std::string check_scenario;
    CLI::App* check = app.add_subcommand("check", "feasibility and convexity report");
    check->add_option("--scenario", check_scenario, "scenario config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitParse;
    }

    try {
        if (solve->parsed()) return run_solve(solve_args);
        if (simulate->parsed()) return run_simulate(sim_args);
        if (sweep->parsed()) return run_sweep(sweep_args);
        if (check->parsed()) return run_check(check_scenario);
    } catch (const evsched::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const evsched::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const evsched::InfeasibleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const evsched::AllocationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const evsched::NonConvexError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const evsched::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNoConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitOk;
}
