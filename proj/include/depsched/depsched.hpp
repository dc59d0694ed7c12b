#pragma once

#include "depsched/closed_form.hpp"
#include "depsched/error.hpp"
#include "depsched/event_sim.hpp"
#include "depsched/metrics.hpp"
#include "depsched/oracle.hpp"
#include "depsched/perf_models.hpp"
#include "depsched/pipeline.hpp"
#include "depsched/schedule.hpp"
#include "depsched/solver.hpp"
#include "depsched/trace.hpp"
#include "depsched/verify.hpp"
