// SPDX-License-Identifier: Apache-2.0
#pragma once

// Uniform dispatch over the seven charging policies, shared by the CLI and
// the comparison sweep.

#include <string>

#include "evsched/baselines.hpp"
#include "evsched/brd.hpp"
#include "evsched/central.hpp"
#include "evsched/errors.hpp"
#include "evsched/scenario.hpp"

namespace evsched {

enum class Policy { central, two_step, ddc, ivfa, rect, pac, uniform };

inline const char* to_string(Policy p) {
    switch (p) {
    case Policy::central: return "central";
    case Policy::two_step: return "two_step";
    case Policy::ddc: return "ddc";
    case Policy::ivfa: return "ivfa";
    case Policy::rect: return "rect";
    case Policy::pac: return "pac";
    case Policy::uniform: return "uniform";
    }
    return "?";
}

inline Policy parse_policy(const std::string& name) {
    if (name == "central") return Policy::central;
    if (name == "two_step") return Policy::two_step;
    if (name == "ddc") return Policy::ddc;
    if (name == "ivfa") return Policy::ivfa;
    if (name == "rect") return Policy::rect;
    if (name == "pac") return Policy::pac;
    if (name == "uniform") return Policy::uniform;
    throw ValidationError("unknown policy '" + name +
                          "' (expected central|two_step|ddc|ivfa|rect|pac|uniform)");
}

struct PolicyOptions {
    SolveOptions solve{};
    BrdConfig brd{};
    PacConfig pac{};
};

struct PolicyRun {
    ChargingProfile profile;
    bool converged = true;
    int rounds = 0;           ///< best-response rounds, when applicable
    double kkt_residual = 0.0;
};

inline PolicyRun run_policy(const Scenario& s, Policy policy, const PolicyOptions& opts = {}) {
    PolicyRun out;
    switch (policy) {
    case Policy::central: {
        SolveReport r = solve_centralized(s, opts.solve);
        out.profile = std::move(r.profile);
        out.converged = r.converged;
        out.kkt_residual = r.kkt_residual;
        break;
    }
    case Policy::two_step: {
        SolveReport r = two_step_solve(s, opts.solve);
        out.profile = std::move(r.profile);
        out.converged = r.converged;
        break;
    }
    case Policy::ddc:
    case Policy::ivfa:
    case Policy::rect: {
        BrdConfig cfg = opts.brd;
        cfg.rule = policy == Policy::ddc    ? BrdRule::ddc
                   : policy == Policy::ivfa ? BrdRule::ivfa
                                            : BrdRule::rect;
        BrdResult r = brd_run(s, cfg);
        out.profile = std::move(r.report.profile);
        out.converged = r.trace.converged;
        out.rounds = r.trace.rounds_to_converge;
        break;
    }
    case Policy::pac:
        out.profile = pac_policy(s, opts.pac);
        break;
    case Policy::uniform:
        out.profile = uniform_policy(s);
        break;
    }
    return out;
}

}  // namespace evsched
