// SPDX-License-Identifier: Apache-2.0
#pragma once

// Convenience include for the whole library.

#include "evsched/baselines.hpp"
#include "evsched/brd.hpp"
#include "evsched/central.hpp"
#include "evsched/cost.hpp"
#include "evsched/csv.hpp"
#include "evsched/errors.hpp"
#include "evsched/metrics.hpp"
#include "evsched/noise.hpp"
#include "evsched/policies.hpp"
#include "evsched/scenario.hpp"
#include "evsched/scenario_io.hpp"
#include "evsched/sweep.hpp"
#include "evsched/synth.hpp"
#include "evsched/thermal.hpp"
